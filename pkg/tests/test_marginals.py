import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_dist, random_tree_scenario
from frustration import quantum
from frustration.marginals import (
    CycleDetected,
    Edge,
    Feasible,
    HiddenState,
    Incompatible,
    Infeasible,
    LhvModel,
    MarginalScenario,
    ScenarioError,
    ScenarioTooLarge,
    glue,
    joint_feasible,
    joint_from_lhv,
    lhv_from_joint,
    scenario_from_joint,
    tree_extend,
    verify_witness,
    witness_from_dict,
)
from frustration.probability import DistTable, ObservableDecl, marginalize, point_mass

X1, X2, X3 = (ObservableDecl(f"X{i}", 2) for i in (1, 2, 3))
ANTI = np.array([[0.0, 0.5], [0.5, 0.0]])


def anti(a, b):
    return Edge(a.id, b.id, DistTable((a, b), ANTI))


def path():
    return MarginalScenario((X1, X2, X3), (anti(X1, X2), anti(X2, X3)))


def triangle():
    return MarginalScenario((X1, X2, X3), (anti(X1, X2), anti(X2, X3), anti(X1, X3)))


def chsh_tables(v=1.0):
    rho = quantum.DensityOp.from_ket(quantum.singlet_ket(), (2, 2))
    if v < 1:
        rho = quantum.DensityOp((2, 2), v * rho.matrix + (1 - v) * np.eye(4) / 4)
    a = [quantum.qubit_axis(0.0), quantum.qubit_axis(math.pi / 2)]
    b = [quantum.qubit_axis(math.pi / 4), quantum.qubit_axis(-math.pi / 4)]
    return quantum.born_pairs(rho, a, b)


def correlator(t):
    v = t.values
    return v[0, 0] + v[1, 1] - v[0, 1] - v[1, 0]


# --- construction ---------------------------------------------------------

def test_scenario_validation():
    with pytest.raises(ScenarioError):
        MarginalScenario((X1,), (Edge("X1", "X1", DistTable((X1, X2), ANTI)),))
    with pytest.raises(ScenarioError):
        MarginalScenario((X1, X2), (anti(X1, X2), anti(X2, X1)))
    with pytest.raises(ScenarioError):
        MarginalScenario((X1, X2), (anti(X1, X3),))
    skew = DistTable((X1, X3), [[0.7, 0.0], [0.0, 0.3]])
    with pytest.raises(Incompatible):
        MarginalScenario((X1, X2, X3), (anti(X1, X2), Edge("X1", "X3", skew)))


def test_edge_tables_stored_in_endpoint_order():
    t = DistTable((X2, X1), [[0.1, 0.2], [0.3, 0.4]])
    sc = MarginalScenario((X1, X2), (Edge("X1", "X2", t),))
    assert sc.edges[0].table.ids == ("X1", "X2")
    np.testing.assert_array_equal(sc.edges[0].table.values, t.values.T)


def test_scenario_json_round_trip():
    sc = triangle()
    back = MarginalScenario.from_dict(json.loads(json.dumps(sc.to_dict())))
    assert back.ids == sc.ids
    for a, b in zip(back.edges, sc.edges):
        assert a.table.allclose(b.table, 0.0)


# --- tree extension -------------------------------------------------------

def test_path_extension_against_enumeration():
    joint = tree_extend(path())
    p12 = p23 = ANTI
    p2 = ANTI.sum(axis=0)
    for x in itertools.product(range(2), repeat=3):
        expect = p12[x[0], x[1]] * p23[x[1], x[2]] / p2[x[1]]
        assert joint.values[x] == pytest.approx(expect, abs=1e-15)
    support = {tuple(int(i) for i in p) for p in zip(*np.nonzero(joint.values))}
    assert support == {(0, 1, 0), (1, 0, 1)}
    assert joint.values[0, 1, 0] == pytest.approx(0.5)


def test_single_edge_extension_is_the_table():
    t = DistTable((X1, ObservableDecl("Y", 3)), [[0.1, 0.2, 0.0], [0.3, 0.0, 0.4]])
    sc = MarginalScenario(t.scope, (Edge("X1", "Y", t),))
    assert tree_extend(sc).allclose(t, 1e-15)


def test_triangle_has_a_loop():
    with pytest.raises(CycleDetected):
        tree_extend(triangle())


def test_null_outcome_on_hub():
    # X2 never takes value 1, so P_2^(1-e) is singular there
    p = np.array([[0.4, 0.0], [0.6, 0.0]])
    sc = MarginalScenario((X1, X2, X3), (Edge("X1", "X2", DistTable((X1, X2), p)),
                                          Edge("X2", "X3", DistTable((X2, X3), p.T))))
    joint = tree_extend(sc)
    assert np.all(joint.values[:, 1, :] == 0)
    for e in sc.edges:
        assert marginalize(joint, [e.i, e.j]).allclose(e.table, 1e-12)


def test_disconnected_components_are_independent():
    Y = ObservableDecl("Y", 3)
    sc = MarginalScenario((X1, X2, Y), (anti(X1, X2),))
    joint = tree_extend(sc)
    np.testing.assert_allclose(marginalize(joint, ["Y"]).values, np.full(3, 1 / 3))
    np.testing.assert_allclose(joint.values, np.repeat(ANTI[:, :, None] / 3, 3, axis=2), atol=1e-15)


@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_tree_extension_reproduces_edges_and_is_feasible(n, seed):
    sc = random_tree_scenario(np.random.default_rng(seed), n)
    joint = tree_extend(sc)
    for e in sc.edges:
        assert np.max(np.abs(marginalize(joint, [e.i, e.j]).values - e.table.values)) <= 1e-9
    res = joint_feasible(sc)
    assert isinstance(res, Feasible)
    for e in sc.edges:
        assert np.max(np.abs(marginalize(res.joint, [e.i, e.j]).values
                             - marginalize(joint, [e.i, e.j]).values)) <= 1e-7


def test_glue_hyperedges():
    shared = (X1,)
    a = DistTable((X1, X2), [[0.1, 0.3], [0.5, 0.1]])
    b = DistTable((X1, X3), [[0.2, 0.2], [0.2, 0.4]])
    j = glue([a, b], ["X1"])
    assert j.ids == ("X1", "X2", "X3")
    assert marginalize(j, ["X1", "X2"]).allclose(a, 1e-12)
    assert marginalize(j, ["X1", "X3"]).allclose(b, 1e-12)
    assert shared[0].id == "X1"


# --- feasibility ----------------------------------------------------------

def test_triangle_infeasible_with_bell_witness():
    sc = triangle()
    res = joint_feasible(sc)
    assert isinstance(res, Infeasible)
    assert verify_witness(res, sc)
    assert res.bound == 1.0 and res.value == pytest.approx(1.5)
    # the witness reads "at most two of three bits can pairwise disagree"
    for _, c in res.witness:
        np.testing.assert_allclose(c, ANTI, atol=1e-12)


def test_witness_json_round_trip():
    sc = triangle()
    res = joint_feasible(sc)
    back = witness_from_dict(json.loads(json.dumps(res.to_dict())), sc)
    assert isinstance(back, Infeasible) and verify_witness(back, sc)
    ok = joint_feasible(path())
    back = witness_from_dict(json.loads(json.dumps(ok.to_dict())), path())
    assert back.joint.allclose(ok.joint, 0.0)


def test_path_feasible_matches_tree():
    res = joint_feasible(path())
    assert isinstance(res, Feasible)
    for e in path().edges:
        assert marginalize(res.joint, [e.i, e.j]).allclose(e.table, 1e-7)


def test_chsh_singlet_infeasible():
    tables = chsh_tables()
    # analytic check of the tables: E(a, b) = -cos(a - b) with Bloch angles
    corr = [correlator(t) for t in tables]
    np.testing.assert_allclose(corr, [-math.cos(math.pi / 4)] * 3 + [math.cos(math.pi / 4)], atol=1e-12)
    chsh = abs(corr[0] + corr[1] + corr[2] - corr[3])
    assert chsh == pytest.approx(2 * math.sqrt(2), abs=1e-12)
    sc = MarginalScenario.from_tables(tables)
    res = joint_feasible(sc)
    assert isinstance(res, Infeasible) and verify_witness(res, sc)


def test_size_cap():
    obs = tuple(ObservableDecl(f"b{i}", 2) for i in range(17))
    edges = tuple(Edge(obs[i].id, obs[i + 1].id, DistTable((obs[i], obs[i + 1]), np.full((2, 2), 0.25)))
                  for i in range(16))
    with pytest.raises(ScenarioTooLarge):
        joint_feasible(MarginalScenario(obs, edges))


@given(st.integers(0, 2**32 - 1))
def test_farkas_soundness_on_quantum_cycles(seed):
    """Pair tables of random two-qubit states around a 4-cycle; whichever way the LP goes, check it."""
    rng = np.random.default_rng(seed)
    rho = quantum.random_density((2, 2), rng, rank=1)
    tables = quantum.born_pairs(rho, [quantum.random_qubit_povm(rng) for _ in range(2)],
                                [quantum.random_qubit_povm(rng) for _ in range(2)])
    sc = MarginalScenario.from_tables(tables)
    res = joint_feasible(sc)
    if isinstance(res, Infeasible):
        assert verify_witness(res, sc)
        assert res.value > res.bound
    else:
        for e in sc.edges:
            assert marginalize(res.joint, [e.i, e.j]).allclose(e.table, 1e-7)


# --- hidden variables -----------------------------------------------------

def test_lhv_examples():
    det = point_mass((X1, X2), (1, 0))
    m = lhv_from_joint(det, (["X1"], ["X2"]))
    assert len(m.lambdas) == 1 and m.lambdas[0].weight == 1.0

    m = lhv_from_joint(tree_extend(path()), (["X1"], ["X2", "X3"]))
    assert sorted(l.weight for l in m.lambdas) == pytest.approx([0.5, 0.5])

    u = DistTable((X1, X2), np.full((2, 2), 0.25))
    assert [l.weight for l in lhv_from_joint(u, (["X1"], ["X2"])).lambdas] == [0.25] * 4


def test_lhv_partition_checked():
    u = DistTable((X1, X2), np.full((2, 2), 0.25))
    with pytest.raises(ScenarioError):
        lhv_from_joint(u, (["X1"], ["X1", "X2"]))
    with pytest.raises(ScenarioError):
        lhv_from_joint(u, (["X1"], []))


def test_joint_from_lhv_examples():
    flat = LhvModel((HiddenState(1.0, {"X1": [0.5, 0.5], "X2": [0.5, 0.5]}),))
    np.testing.assert_allclose(joint_from_lhv(flat, ["X1", "X2"]).values, np.full((2, 2), 0.25))
    corr = LhvModel((HiddenState(0.5, {"X1": [1, 0], "X2": [1, 0]}),
                     HiddenState(0.5, {"X1": [0, 1], "X2": [0, 1]})))
    np.testing.assert_allclose(joint_from_lhv(corr, ["X1", "X2"]).values, [[0.5, 0], [0, 0.5]])
    with pytest.raises(ScenarioError):
        LhvModel((HiddenState(0.7, {"X1": [1, 0]}),))


@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_joint_lhv_round_trip(n, seed):
    rng = np.random.default_rng(seed)
    decls = tuple(ObservableDecl(f"Z{i}", int(rng.integers(2, 4))) for i in range(n))
    joint = DistTable(decls, random_dist(rng, tuple(d.k for d in decls)))
    ids = list(joint.ids)
    back = joint_from_lhv(lhv_from_joint(joint, (ids[:1], ids[1:])), ids)
    assert np.max(np.abs(back.values - joint.values)) <= 1e-12


@given(st.integers(0, 2**32 - 1))
def test_any_lhv_model_gives_feasible_pairs(seed):
    rng = np.random.default_rng(seed)
    ids = ["A", "B", "C"]
    lams = []
    w = rng.dirichlet(np.ones(3))
    for wi in w:
        lams.append(HiddenState(float(wi), {i: rng.dirichlet(np.ones(2)) for i in ids}))
    joint = joint_from_lhv(LhvModel(tuple(lams)), ids)
    sc = scenario_from_joint(joint, [("A", "B"), ("B", "C"), ("A", "C")])
    assert isinstance(joint_feasible(sc), Feasible)
