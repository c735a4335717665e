"""Small-dimension density operators, POVMs and symmetric-extension joints.

States carry their tensor-factor structure in ``dims``; all arithmetic is
dense complex.  The joints built here are the classical distributions that
witness local-hidden-variable models for states with symmetric extensions:
measuring every copy of ``B`` (or every member of a layer) with a different
observable yields one Born-rule table that contains all the pair
statistics as marginals.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .probability import DistTable, ObservableDecl

MAX_DIM = 2**14
HERM_TOL = 1e-10
SYM_TOL = 1e-8
MAX_GROUP = 10**6


class QuantumError(ValueError):
    pass


class DimensionMismatch(QuantumError):
    pass


class AsymmetricState(QuantumError):
    pass


class GroupTooLarge(QuantumError):
    pass


def _encode(mat: np.ndarray) -> list[float]:
    flat = np.asarray(mat, dtype=complex).ravel()
    out = np.empty(2 * flat.size)
    out[0::2] = flat.real
    out[1::2] = flat.imag
    return out.tolist()


def _decode(entries, side: int) -> np.ndarray:
    arr = np.asarray(entries, dtype=float)
    if arr.size != 2 * side * side:
        raise QuantumError(f"expected {2 * side * side} interleaved entries, got {arr.size}")
    return (arr[0::2] + 1j * arr[1::2]).reshape(side, side)


@dataclass(frozen=True)
class DensityOp:
    dims: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or min(dims) < 1:
            raise QuantumError(f"invalid dims {dims}")
        side = int(np.prod(dims))
        if side > MAX_DIM:
            raise QuantumError(f"Hilbert dimension {side} exceeds cap {MAX_DIM}")
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (side, side):
            raise DimensionMismatch(f"matrix shape {m.shape} does not match dims {dims}")
        if np.max(np.abs(m - m.conj().T)) > HERM_TOL:
            raise QuantumError("density matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        if abs(np.trace(m).real - 1.0) > HERM_TOL:
            raise QuantumError(f"trace {np.trace(m).real!r} != 1")
        if np.linalg.eigvalsh(m)[0] < -HERM_TOL:
            raise QuantumError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)

    @property
    def n_factors(self) -> int:
        return len(self.dims)

    def to_dict(self) -> dict:
        return {"dims": list(self.dims), "entries": _encode(self.matrix)}

    @classmethod
    def from_dict(cls, data: dict) -> "DensityOp":
        dims = tuple(int(d) for d in data["dims"])
        return cls(dims, _decode(data["entries"], int(np.prod(dims))))

    @classmethod
    def from_ket(cls, psi, dims: Sequence[int]) -> "DensityOp":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(tuple(dims), np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "DensityOp":
        side = int(np.prod(dims))
        return cls(tuple(dims), np.eye(side) / side)

    def tensor(self, other: "DensityOp") -> "DensityOp":
        return DensityOp(self.dims + other.dims, np.kron(self.matrix, other.matrix))


@dataclass(frozen=True)
class Povm:
    effects: tuple[np.ndarray, ...] = field(repr=False)
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        effects = tuple(np.array(e, dtype=complex) for e in self.effects)
        if not effects:
            raise QuantumError("POVM needs at least one effect")
        side = effects[0].shape[0]
        for e in effects:
            if e.shape != (side, side):
                raise DimensionMismatch("POVM effects differ in size")
            if np.max(np.abs(e - e.conj().T)) > HERM_TOL or np.linalg.eigvalsh(e)[0] < -HERM_TOL:
                raise QuantumError("POVM effect is not positive semidefinite")
        if np.max(np.abs(sum(effects) - np.eye(side))) > HERM_TOL:
            raise QuantumError("POVM effects do not sum to the identity")
        for e in effects:
            e.setflags(write=False)
        labels = tuple(self.labels) or tuple(str(a) for a in range(len(effects)))
        if len(labels) != len(effects):
            raise QuantumError("one label per effect required")
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self):
        return len(self.effects)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "labels": list(self.labels),
            "effects": [_encode(e) for e in self.effects],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Povm":
        d = int(data["dim"])
        return cls(tuple(_decode(e, d) for e in data["effects"]), tuple(data.get("labels", ())))


def projective(vectors) -> Povm:
    """POVM of rank-one projectors onto the given orthonormal vectors."""
    vecs = [np.asarray(v, dtype=complex) for v in vectors]
    return Povm(tuple(np.outer(v, v.conj()) for v in vecs))


def qubit_axis(theta: float, phi: float = 0.0) -> Povm:
    """Spin measurement along the Bloch direction (theta, phi); outcome 0 is spin up."""
    n = (np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))
    sig = n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z
    return Povm(((np.eye(2) + sig) / 2, (np.eye(2) - sig) / 2))


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def singlet_ket() -> np.ndarray:
    return np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


def _as_tensor(rho: DensityOp) -> np.ndarray:
    return rho.matrix.reshape(rho.dims + rho.dims)


def partial_trace(rho: DensityOp, keep: Sequence[int]) -> DensityOp:
    """Reduce ``rho`` to the factors in ``keep`` (kept in ascending order)."""
    keep = sorted(set(int(k) for k in keep))
    n = rho.n_factors
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise QuantumError(f"invalid factor indices {keep} for {n} factors")
    if len(keep) == n:
        return rho
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = list(letters[:n])
    col = [row[k] if k not in keep else letters[n + k] for k in range(n)]
    out = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, _as_tensor(rho))
    dims = tuple(rho.dims[k] for k in keep)
    side = int(np.prod(dims))
    return DensityOp(dims, reduced.reshape(side, side))


def born_table(rho: DensityOp, povms: Sequence[Povm], ids: Sequence[str]) -> DistTable:
    """Table of ``tr[rho (E_1(a_1) x ... x E_n(a_n))]`` with one POVM per factor."""
    if len(povms) != rho.n_factors:
        raise DimensionMismatch(f"{len(povms)} POVMs for {rho.n_factors} factors")
    for p, d in zip(povms, rho.dims):
        if p.dim != d:
            raise DimensionMismatch(f"POVM of dimension {p.dim} on a factor of dimension {d}")
    n = rho.n_factors
    t = _as_tensor(rho)
    # contract each factor with its stack of effects: sum_{ij} rho[..i..,..j..] E[a, j, i]
    for f, p in enumerate(povms):
        eff = np.stack(p.effects)  # (k, d, d)
        # axes now: f outcome axes, rows f..n-1, cols f..n-1; column f sits at n
        t = np.tensordot(t, eff, axes=([f, n], [2, 1]))
        # outcome axis was appended at the end; bring it to position f
        t = np.moveaxis(t, -1, f)
    vals = np.real_if_close(t, tol=1e6).real
    scope = tuple(ObservableDecl(i, len(p)) for i, p in zip(ids, povms))
    return DistTable(scope, _clean(vals))


def _clean(vals: np.ndarray) -> np.ndarray:
    vals = np.where(np.abs(vals) < 1e-14, 0.0, vals)
    return vals / vals.sum()


def born_pairs(rho_ab: DensityOp, a_povms: Sequence[Povm], b_povms: Sequence[Povm]) -> list[DistTable]:
    """One table per (A_i, B_j), in row-major (i, j) order; ids ``A{i+1}``, ``B{j+1}``."""
    if rho_ab.n_factors != 2:
        raise DimensionMismatch(f"expected a bipartite state, got dims {rho_ab.dims}")
    return [
        born_table(rho_ab, [fa, gb], [f"A{i + 1}", f"B{j + 1}"])
        for i, fa in enumerate(a_povms)
        for j, gb in enumerate(b_povms)
    ]


# --------------------------------------------------------------------------
# group averaging


def _compose(p, q):
    # (p o q)[k] = p[q[k]]
    return tuple(p[k] for k in q)


def group_closure(generators: Sequence[Sequence[int]], n: int, cap: int = MAX_GROUP) -> list[tuple[int, ...]]:
    """Breadth-first closure of the permutation group generated by ``generators``."""
    ident = tuple(range(n))
    gens = [tuple(int(x) for x in g) for g in generators]
    for g in gens:
        if sorted(g) != list(range(n)):
            raise QuantumError(f"{g} is not a permutation of {n} factors")
    seen = {ident}
    order = [ident]
    queue = deque([ident])
    while queue:
        h = queue.popleft()
        for g in gens:
            k = _compose(g, h)
            if k not in seen:
                seen.add(k)
                order.append(k)
                if len(order) > cap:
                    raise GroupTooLarge(f"group exceeds {cap} elements")
                queue.append(k)
    return order


def permute(rho: DensityOp, perm: Sequence[int]) -> DensityOp:
    """``U rho U^dagger`` where ``U`` sends tensor factor ``k`` to position ``perm[k]``."""
    n = rho.n_factors
    inv = np.argsort(perm)
    if any(rho.dims[inv[m]] != rho.dims[m] for m in range(n)):
        raise DimensionMismatch("permutation mixes factors of different dimension")
    axes = list(inv) + [n + a for a in inv]
    side = rho.matrix.shape[0]
    return DensityOp(rho.dims, np.transpose(_as_tensor(rho), axes).reshape(side, side))


def twirl(rho: DensityOp, generators: Sequence[Sequence[int]]) -> DensityOp:
    """Average ``rho`` over the permutation group generated by ``generators``."""
    group = group_closure(generators, rho.n_factors)
    n = rho.n_factors
    for g in group:
        inv = np.argsort(g)
        if any(rho.dims[inv[m]] != rho.dims[m] for m in range(n)):
            raise DimensionMismatch("permutation mixes factors of different dimension")
    t = _as_tensor(rho)
    acc = np.zeros_like(t)
    for g in group:
        inv = list(np.argsort(g))
        acc += np.transpose(t, inv + [n + a for a in inv])
    side = rho.matrix.shape[0]
    return DensityOp(rho.dims, acc.reshape(side, side) / len(group))


def symmetry_residual(rho: DensityOp, generators: Sequence[Sequence[int]]) -> float:
    """Largest entrywise change of ``rho`` under any generator."""
    return max(
        (float(np.max(np.abs(permute(rho, g).matrix - rho.matrix))) for g in generators),
        default=0.0,
    )


def transpositions(block: Sequence[int], n: int) -> list[tuple[int, ...]]:
    """Adjacent transpositions generating the symmetric group on ``block``."""
    gens = []
    for a, b in zip(block, block[1:]):
        p = list(range(n))
        p[a], p[b] = p[b], p[a]
        gens.append(tuple(p))
    return gens


# --------------------------------------------------------------------------
# symmetric extensions


def star_extension_joint(rho: DensityOp, f_povms: Sequence[Povm], g_povms: Sequence[Povm]) -> list[DistTable]:
    """Joint tables ``tr[rho F_i(a) x G_1(b_1) x ... x G_m(b_m)]``, one per A-observable.

    ``rho`` lives on ``A x B^m`` with factor 0 the ``A`` site; every
    reduction ``rho_{A B_j}`` must be the same state.  Scope of the i-th
    table is ``(A{i+1}, B1, ..., Bm)``.
    """
    m = rho.n_factors - 1
    if m < 1:
        raise DimensionMismatch("need at least one B factor")
    if len(g_povms) != m:
        raise DimensionMismatch(f"{len(g_povms)} B-observables for {m} B-sites")
    if len(set(rho.dims[1:])) != 1:
        raise DimensionMismatch("B factors differ in dimension")
    reductions = [partial_trace(rho, [0, j]) for j in range(1, m + 1)]
    for r in reductions[1:]:
        if np.max(np.abs(r.matrix - reductions[0].matrix)) > SYM_TOL:
            raise AsymmetricState("reductions rho_AB_j are not all equal")
    b_ids = [f"B{j + 1}" for j in range(m)]
    return [born_table(rho, [f, *g_povms], [f"A{i + 1}", *b_ids]) for i, f in enumerate(f_povms)]


def layer_sites(n_layers: int, m: int) -> list[list[int]]:
    """Factor indices of each layer; the single site is factor ``n_layers * m``."""
    return [list(range(i * m, (i + 1) * m)) for i in range(n_layers)]


def layered_extension_joint(
    rho: DensityOp, layer_povms: Sequence[Sequence[Povm]], single_povm: Povm
) -> DistTable:
    """Joint table for ``(n-1)`` permutation-symmetric layers of ``m`` sites plus one site.

    Factor order: layer 1 sites, layer 2 sites, ..., then the single site.
    Observable ``k`` of layer ``i`` is measured on the ``k``-th site of that
    layer; ids are ``L{i}_{k}`` (1-based) and ``S`` for the single site.
    """
    n_layers = len(layer_povms)
    if n_layers < 1:
        raise DimensionMismatch("need at least one layer")
    m = len(layer_povms[0])
    if any(len(lp) != m for lp in layer_povms):
        raise DimensionMismatch("layers must have equal size")
    if rho.n_factors != n_layers * m + 1:
        raise DimensionMismatch(f"state has {rho.n_factors} factors, expected {n_layers * m + 1}")
    n = rho.n_factors
    for sites in layer_sites(n_layers, m):
        gens = transpositions(sites, n)
        if gens and symmetry_residual(rho, gens) > SYM_TOL:
            raise AsymmetricState(f"state is not symmetric within layer {sites}")
    povms = [p for lp in layer_povms for p in lp] + [single_povm]
    ids = [f"L{i + 1}_{k + 1}" for i in range(n_layers) for k in range(m)] + ["S"]
    return born_table(rho, povms, ids)


def reduced_layer_table(
    rho: DensityOp, m: int, kept: Sequence[int], povms: Sequence[Povm], ids: Sequence[str]
) -> DistTable:
    """Born table of the n-partite reduction keeping site ``kept[i]`` of layer ``i`` and the single site."""
    n_layers = len(kept)
    sites = [i * m + k for i, k in enumerate(kept)] + [n_layers * m]
    return born_table(partial_trace(rho, sites), povms, ids)


def random_density(dims: Sequence[int], rng: np.random.Generator, rank: int | None = None) -> DensityOp:
    """Ginibre-distributed random state of the given rank (full rank by default)."""
    side = int(np.prod(dims))
    rank = side if rank is None else rank
    g = rng.normal(size=(side, rank)) + 1j * rng.normal(size=(side, rank))
    m = g @ g.conj().T
    return DensityOp(tuple(dims), m / np.trace(m).real)


def random_qubit_povm(rng: np.random.Generator) -> Povm:
    """Projective qubit measurement along a uniformly random axis."""
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return qubit_axis(np.arccos(np.clip(v[2], -1, 1)), np.arctan2(v[1], v[0]))


def load_density(path) -> DensityOp:
    with open(path) as fh:
        return DensityOp.from_dict(json.load(fh))

