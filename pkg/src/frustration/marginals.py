"""Joint distributions for prescribed pair marginals.

Three routes are provided:

* :func:`tree_extend` -- closed-form extension for loop-free scenarios,
  ``P = prod_edges P_kl * prod_vertices P_j**(1 - e_j)``.
* :func:`joint_feasible` -- existence of a joint for arbitrary scenarios,
  decided by a phase-I simplex over mixtures of deterministic assignments.
  When no joint exists the LP duals give a Bell-type inequality that the
  pair tables violate.
* :func:`lhv_from_joint` / :func:`joint_from_lhv` -- the translation between
  joints and finite local-hidden-variable ensembles.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .probability import (
    INGEST_TOL,
    DistTable,
    ObservableDecl,
    ProbabilityError,
    UnknownObservable,
    compatible,
    marginalize,
    uniform,
)
from .simplex import FEAS_TOL, phase_one

MAX_ASSIGNMENTS = 2**16
WITNESS_MARGIN = 1e-7


class ScenarioError(ValueError):
    pass


class CycleDetected(ScenarioError):
    pass


class Incompatible(ScenarioError):
    pass


class ScenarioTooLarge(ScenarioError):
    pass


@dataclass(frozen=True)
class Edge:
    i: str
    j: str
    table: DistTable

    def to_dict(self) -> dict:
        return {"i": self.i, "j": self.j, "table": self.table.to_dict()}


@dataclass(frozen=True)
class MarginalScenario:
    """Observables on the vertices of a simple graph, pair tables on its edges.

    Edge tables are stored with scope order ``(i, j)``.  Overlapping
    marginals are checked for compatibility on construction.
    """

    observables: tuple[ObservableDecl, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        obs = tuple(self.observables)
        ids = [o.id for o in obs]
        if len(set(ids)) != len(ids):
            raise ScenarioError("duplicate observable ids")
        by_id = {o.id: o for o in obs}
        seen = set()
        edges = []
        for e in self.edges:
            if e.i == e.j:
                raise ScenarioError(f"self-loop on {e.i!r}")
            if e.i not in by_id or e.j not in by_id:
                raise ScenarioError(f"edge ({e.i}, {e.j}) references an unknown observable")
            key = frozenset((e.i, e.j))
            if key in seen:
                raise ScenarioError(f"duplicate edge ({e.i}, {e.j})")
            seen.add(key)
            if set(e.table.ids) != {e.i, e.j} or len(e.table.scope) != 2:
                raise ScenarioError(f"edge ({e.i}, {e.j}) table has scope {e.table.ids}")
            t = e.table.transpose([e.i, e.j])
            if t.scope != (by_id[e.i], by_id[e.j]):
                raise ScenarioError(f"edge ({e.i}, {e.j}) alphabet sizes disagree with declarations")
            edges.append(Edge(e.i, e.j, t))
        edges = tuple(edges)
        for a, b in itertools.combinations(edges, 2):
            if not compatible(a.table, b.table, INGEST_TOL):
                raise Incompatible(f"edges ({a.i},{a.j}) and ({b.i},{b.j}) disagree on a shared marginal")
        object.__setattr__(self, "observables", obs)
        object.__setattr__(self, "edges", edges)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(o.id for o in self.observables)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(o.k for o in self.observables)

    def degree(self, obs_id: str) -> int:
        return sum(obs_id in (e.i, e.j) for e in self.edges)

    def vertex_marginal(self, obs_id: str) -> DistTable:
        """Marginal of one observable, read from its first incident edge (uniform if isolated)."""
        for e in self.edges:
            if obs_id in (e.i, e.j):
                return marginalize(e.table, [obs_id])
        return uniform(next(o for o in self.observables if o.id == obs_id))

    def is_forest(self) -> bool:
        parent = {i: i for i in self.ids}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            ri, rj = find(e.i), find(e.j)
            if ri == rj:
                return False
            parent[ri] = rj
        return True

    def to_dict(self) -> dict:
        return {
            "observables": [o.to_dict() for o in self.observables],
            "edges": [e.to_dict() for e in self.edges],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MarginalScenario":
        obs = tuple(ObservableDecl(str(o["id"]), int(o["k"])) for o in data["observables"])
        edges = tuple(
            Edge(str(e["i"]), str(e["j"]), DistTable.from_dict(e["table"])) for e in data["edges"]
        )
        return cls(obs, edges)

    @classmethod
    def from_tables(cls, tables: Sequence[DistTable]) -> "MarginalScenario":
        """Scenario whose edges are the given two-observable tables."""
        decls: dict[str, ObservableDecl] = {}
        edges = []
        for t in tables:
            if len(t.scope) != 2:
                raise ScenarioError(f"edge table must have two observables, got {t.ids}")
            for o in t.scope:
                if decls.setdefault(o.id, o) != o:
                    raise ScenarioError(f"conflicting declarations for {o.id!r}")
            edges.append(Edge(t.ids[0], t.ids[1], t))
        return cls(tuple(decls.values()), tuple(edges))


def scenario_from_joint(joint: DistTable, pairs: Sequence[tuple[str, str]]) -> MarginalScenario:
    """Scenario carrying the marginals of ``joint`` on the listed pairs."""
    tables = [marginalize(joint, p).transpose(list(p)) for p in pairs]
    return MarginalScenario(joint.scope, tuple(Edge(a, b, t) for (a, b), t in zip(pairs, tables)))


def _broadcast(table: DistTable, ids: Sequence[str]) -> np.ndarray:
    """View ``table`` as an array broadcastable over the full scope ``ids``."""
    t = table.transpose([i for i in ids if i in set(table.ids)])
    shape = [1] * len(ids)
    for o in t.scope:
        shape[ids.index(o.id)] = o.k
    return t.values.reshape(shape)


def tree_extend(scenario: MarginalScenario) -> DistTable:
    """Closed-form joint for a loop-free scenario.

    Vertex factors ``P_j**(1-e_j)`` are taken as zero wherever
    ``P_j(x) == 0``; isolated vertices without a marginal enter as uniform.
    """
    if not scenario.is_forest():
        raise CycleDetected("scenario graph contains a loop")
    ids = list(scenario.ids)
    vals = np.ones(scenario.shape)
    for e in scenario.edges:
        vals = vals * _broadcast(e.table, ids)
    for obs in scenario.observables:
        e_j = scenario.degree(obs.id)
        if e_j == 1:
            continue
        p = scenario.vertex_marginal(obs.id).values
        factor = np.zeros_like(p)
        nz = p > 0
        factor[nz] = p[nz] ** (1 - e_j)
        shape = [1] * len(ids)
        shape[ids.index(obs.id)] = obs.k
        vals = vals * factor.reshape(shape)
    return DistTable(scenario.observables, vals)


def glue(tables: Sequence[DistTable], shared: Sequence[str]) -> DistTable:
    """Join tables that overlap exactly on ``shared``: ``prod_i P_i / P_shared**(n-1)``.

    This is the tree construction with a block of observables as the common
    vertex.  Scope order: ``shared`` first, then each table's private part.
    """
    if not tables:
        raise ScenarioError("nothing to glue")
    shared = list(shared)
    private: list[ObservableDecl] = []
    for t in tables:
        for obs_id in shared:
            t.axis(obs_id)
        for o in t.scope:
            if o.id not in shared:
                if any(p.id == o.id for p in private):
                    raise ScenarioError(f"{o.id!r} is private to more than one table")
                private.append(o)
    for a, b in itertools.combinations(tables, 2):
        if not compatible(a, b, INGEST_TOL):
            raise Incompatible("tables disagree on the shared block")
    scope = tuple(tables[0].decl(i) for i in shared) + tuple(private)
    ids = [o.id for o in scope]
    vals = np.ones(tuple(o.k for o in scope))
    for t in tables:
        vals = vals * _broadcast(t, ids)
    if len(tables) > 1:
        p = _broadcast(marginalize(tables[0], shared), ids)
        factor = np.zeros_like(p)
        nz = p > 0
        factor[nz] = p[nz] ** (1 - len(tables))
        vals = vals * factor
    return DistTable(scope, vals)


# --------------------------------------------------------------------------
# feasibility


@dataclass(frozen=True)
class Feasible:
    joint: DistTable
    feasible: bool = field(default=True, init=False)

    def to_dict(self) -> dict:
        return {"feasible": True, "joint": self.joint.to_dict()}


@dataclass(frozen=True)
class Infeasible:
    """Bell-type witness: ``sum_e sum_o coeff_e(o) P_e(o) <= bound`` for every joint.

    ``value`` is the witness evaluated on the scenario's own tables.
    """

    witness: tuple[tuple[Edge, np.ndarray], ...]
    bound: float
    value: float
    feasible: bool = field(default=False, init=False)

    def evaluate(self, tables: Sequence[DistTable]) -> float:
        return float(sum(np.sum(c * t.values) for (_, c), t in zip(self.witness, tables)))

    def to_dict(self) -> dict:
        return {
            "feasible": False,
            "bound": self.bound,
            "value": self.value,
            "witness": [
                {"i": e.i, "j": e.j, "coefficients": c.tolist()} for e, c in self.witness
            ],
        }


JointWitness = Feasible | Infeasible


def witness_from_dict(data: dict, scenario: MarginalScenario) -> JointWitness:
    if data["feasible"]:
        return Feasible(DistTable.from_dict(data["joint"]))
    by_pair = {(e.i, e.j): e for e in scenario.edges}
    wit = tuple(
        (by_pair[(w["i"], w["j"])], np.asarray(w["coefficients"], dtype=float)) for w in data["witness"]
    )
    return Infeasible(wit, float(data["bound"]), float(data["value"]))


def _assignment_matrix(scenario: MarginalScenario):
    """Constraint matrix of the mixture LP.

    Columns enumerate global assignments in row-major scope order; rows are
    one per (edge, outcome pair) plus a final normalisation row.
    """
    shape = scenario.shape
    n_assign = int(np.prod(shape, dtype=np.int64))
    if n_assign > MAX_ASSIGNMENTS:
        raise ScenarioTooLarge(f"{n_assign} deterministic assignments exceed cap {MAX_ASSIGNMENTS}")
    idx = np.indices(shape).reshape(len(shape), -1)
    pos = {o.id: n for n, o in enumerate(scenario.observables)}
    blocks, rhs = [], []
    for e in scenario.edges:
        ki, kj = e.table.shape
        code = idx[pos[e.i]] * kj + idx[pos[e.j]]
        block = np.zeros((ki * kj, n_assign))
        block[code, np.arange(n_assign)] = 1.0
        blocks.append(block)
        rhs.append(e.table.values.ravel())
    blocks.append(np.ones((1, n_assign)))
    rhs.append(np.ones(1))
    return np.vstack(blocks), np.concatenate(rhs), idx


def _deterministic_values(coeffs: Sequence[np.ndarray], scenario: MarginalScenario, idx) -> np.ndarray:
    pos = {o.id: n for n, o in enumerate(scenario.observables)}
    total = np.zeros(idx.shape[1])
    for e, c in zip(scenario.edges, coeffs):
        total += c[idx[pos[e.i]], idx[pos[e.j]]]
    return total


def joint_feasible(scenario: MarginalScenario, feas_tol: float = FEAS_TOL) -> JointWitness:
    """Decide whether some joint distribution reproduces every edge table."""
    A, b, idx = _assignment_matrix(scenario)
    res = phase_one(A, b, feas_tol=feas_tol)
    if res.feasible:
        w = np.clip(res.x, 0.0, None)
        w /= w.sum()
        return Feasible(DistTable(scenario.observables, w.reshape(scenario.shape)))

    # duals -> per-edge coefficient tables; the normalisation row only shifts the bound
    coeffs, start = [], 0
    for e in scenario.edges:
        ki, kj = e.table.shape
        c = res.y[start:start + ki * kj].reshape(ki, kj)
        coeffs.append(c - c.min())
        start += ki * kj
    det = _deterministic_values(coeffs, scenario, idx)
    bound = float(det.max())
    value = float(sum(np.sum(c * e.table.values) for e, c in zip(scenario.edges, coeffs)))
    if bound <= 0 or value - bound <= 0:
        raise ScenarioError(
            f"LP reported infeasibility {res.infeasibility:.3e} but the dual is not separating"
        )
    coeffs = [c / bound for c in coeffs]
    return Infeasible(
        tuple(zip(scenario.edges, coeffs)), 1.0, value / bound
    )


def verify_witness(result: Infeasible, scenario: MarginalScenario, margin: float = WITNESS_MARGIN) -> bool:
    """Exhaustively check that ``result`` is a valid, violated Bell-type inequality."""
    _, _, idx = _assignment_matrix(scenario)
    coeffs = [c for _, c in result.witness]
    det_max = float(_deterministic_values(coeffs, scenario, idx).max())
    value = result.evaluate([e.table for e in scenario.edges])
    return det_max <= result.bound + 1e-12 and value >= result.bound + margin


# --------------------------------------------------------------------------
# local hidden variables


@dataclass(frozen=True)
class HiddenState:
    weight: float
    responses: Mapping[str, np.ndarray]


@dataclass(frozen=True)
class LhvModel:
    lambdas: tuple[HiddenState, ...]

    def __post_init__(self):
        lams = tuple(self.lambdas)
        weights = np.array([l.weight for l in lams], dtype=float)
        if weights.size == 0:
            raise ScenarioError("empty hidden-variable ensemble")
        if weights.min() < 0 or abs(weights.sum() - 1.0) > INGEST_TOL:
            raise ScenarioError("hidden-variable weights must be nonnegative and sum to 1")
        for lam in lams:
            for obs_id, row in lam.responses.items():
                row = np.asarray(row, dtype=float)
                if row.min() < -1e-12 or abs(row.sum() - 1.0) > INGEST_TOL:
                    raise ScenarioError(f"response row of {obs_id!r} is not a distribution")
        object.__setattr__(self, "lambdas", lams)

    def to_dict(self) -> dict:
        return {
            "lambdas": [
                {"weight": l.weight, "responses": {k: list(map(float, v)) for k, v in l.responses.items()}}
                for l in self.lambdas
            ]
        }


def lhv_from_joint(joint: DistTable, partition: tuple[Sequence[str], Sequence[str]]) -> LhvModel:
    """Deterministic hidden-variable model with the joint as the measure.

    One hidden state per support point of ``joint``; its responses are unit
    rows picking that point's outcome for every observable.
    """
    left, right = (list(p) for p in partition)
    if set(left) & set(right):
        raise ScenarioError("partition blocks overlap")
    if sorted(left + right) != sorted(joint.ids):
        raise ScenarioError(f"partition {left} | {right} does not cover {joint.ids}")
    lams = []
    for point in zip(*np.nonzero(joint.values)):
        resp = {}
        for o, x in zip(joint.scope, point):
            row = np.zeros(o.k)
            row[x] = 1.0
            resp[o.id] = row
        lams.append(HiddenState(float(joint.values[point]), resp))
    return LhvModel(tuple(lams))


def joint_from_lhv(model: LhvModel, scope: Sequence[str]) -> DistTable:
    """``P(a) = sum_lambda w(lambda) prod_i chi_i(a_i | lambda)``."""
    first = model.lambdas[0].responses
    decls = []
    for obs_id in scope:
        if obs_id not in first:
            raise UnknownObservable(f"no response row for {obs_id!r}")
        decls.append(ObservableDecl(obs_id, len(first[obs_id])))
    vals = np.zeros(tuple(d.k for d in decls))
    for lam in model.lambdas:
        term = np.array(lam.weight)
        for d in decls:
            if d.id not in lam.responses:
                raise UnknownObservable(f"no response row for {d.id!r}")
            row = np.asarray(lam.responses[d.id], dtype=float)
            if row.size != d.k:
                raise ProbabilityError(f"response rows of {d.id!r} have inconsistent length")
            term = np.multiply.outer(term, row)
        vals += term
    return DistTable(tuple(decls), vals)


def load_scenario(path) -> MarginalScenario:
    with open(path) as fh:
        return MarginalScenario.from_dict(json.load(fh))
