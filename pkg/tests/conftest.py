import sys
import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from frustration.marginals import Edge, MarginalScenario
from frustration.probability import DistTable, ObservableDecl

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


def random_dist(rng: np.random.Generator, shape) -> np.ndarray:
    v = rng.exponential(size=shape)
    # sprinkle exact zeros so the null-outcome branches get exercised
    v[rng.random(shape) < 0.15] = 0.0
    if v.sum() == 0:
        v.flat[0] = 1.0
    return v / v.sum()


def random_tree_scenario(rng: np.random.Generator, n_obs: int, max_k: int = 3) -> MarginalScenario:
    """Forest scenario whose edge tables come from a forward-sampled tree model."""
    decls = [ObservableDecl(f"X{i}", int(rng.integers(2, max_k + 1))) for i in range(n_obs)]
    marg = {0: random_dist(rng, decls[0].k)}
    edges = []
    for v in range(1, n_obs):
        if rng.random() < 0.15:
            marg[v] = random_dist(rng, decls[v].k)
            continue
        u = int(rng.integers(0, v))
        cond = np.stack([random_dist(rng, decls[v].k) for _ in range(decls[u].k)])
        pair = marg[u][:, None] * cond
        marg[v] = pair.sum(axis=0)
        edges.append(Edge(decls[u].id, decls[v].id, DistTable((decls[u], decls[v]), pair)))
    return MarginalScenario(tuple(decls), tuple(edges))


@st.composite
def dist_tables(draw, max_obs=3, max_k=3):
    n = draw(st.integers(1, max_obs))
    ks = draw(st.lists(st.integers(1, max_k), min_size=n, max_size=n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    scope = tuple(ObservableDecl(f"V{i}", k) for i, k in enumerate(ks))
    return DistTable(scope, random_dist(rng, tuple(ks)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for i in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.report_line(i))
