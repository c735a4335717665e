"""Gaussian ground states of ``H = sum_edges (Q_k + Q_l)**2 + (P_k - P_l)**2``.

Conventions: ``H = Q^T h_q Q + P^T h_p P`` with ``h_q = D + A`` and
``h_p = D - A``; the covariance matrix is ``Gamma_kl = <{R_k, R_l}>``, so the
vacuum has ``Gamma = 1`` and the variance of ``v.R`` is ``v^T Gamma v / 2``.
For commuting ``h_q, h_p`` with joint eigenvalues ``q_k, p_k`` the ground
state has ``gamma_q = sqrt(p_k / q_k)`` and ``gamma_p = sqrt(q_k / p_k)``
per mode.  Modes with ``p_k = 0`` are infinitely squeezed in ``Q``
(``gamma_q = 0``, ``gamma_p`` divergent) and vice versa.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate

from . import graphs
from .graphs import Graph

EPS = 1e-10
NEG_TOL = 1e-8
OVERLAP_TOL = 1e-9
MAX_DENSE = 4096
MAX_RING = 10**6
QUBIT_CHAIN_REFERENCE = 0.29  # lower bound for the infinite qubit chain, plotted as a reference line

CSV_HEADER = ("N", "vq", "vp", "delta", "eof_ebits", "e0_per_mode")


class GaussianError(ValueError):
    pass


class Divergent(GaussianError):
    pass


class NonTransitive(GaussianError):
    pass


@dataclass(frozen=True)
class HamiltonianPair:
    h_q: np.ndarray = field(repr=False)
    h_p: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("h_q", "h_p"):
            m = np.array(getattr(self, name), dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise GaussianError(f"{name} must be square")
            if np.max(np.abs(m - m.T), initial=0.0) > 1e-12:
                raise GaussianError(f"{name} is not symmetric")
            if np.linalg.eigvalsh(m)[0] < -EPS:
                raise GaussianError(f"{name} is not positive semidefinite")
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        if self.h_q.shape != self.h_p.shape:
            raise GaussianError("h_q and h_p differ in size")

    @property
    def n(self) -> int:
        return self.h_q.shape[0]

    def commute(self, tol: float = 1e-10) -> bool:
        c = self.h_q @ self.h_p - self.h_p @ self.h_q
        return bool(np.max(np.abs(c), initial=0.0) <= tol)


def hamiltonian_pair(g: Graph) -> HamiltonianPair:
    if not graphs.is_connected(g):
        raise GaussianError(f"graph {g.tag} is disconnected")
    A = graphs.adjacency(g)
    D = np.diag(A.sum(axis=1))
    return HamiltonianPair(D + A, D - A)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def ground_energy(pair: HamiltonianPair) -> float:
    """``|| sqrt(h_q h_p) ||_1`` as ``sum sqrt(mu)`` over ``eig(sqrt(h_q) h_p sqrt(h_q))``."""
    s = _psd_sqrt(pair.h_q)
    mu = np.linalg.eigvalsh(s @ pair.h_p @ s)
    if mu.size and mu[0] < -NEG_TOL:
        raise GaussianError(f"symmetrised product has eigenvalue {mu[0]:.3e}")
    mu = np.where(mu < EPS, 0.0, mu)
    return float(np.sqrt(mu).sum())


def symplectic_spectrum(pair: HamiltonianPair) -> np.ndarray:
    """Normal-mode frequencies of ``h_q (+) h_p`` from the eigenvalues ``+-i nu`` of ``Omega h``."""
    n = pair.n
    Z = np.zeros((n, n))
    # Omega h with Omega = [[0, 1], [-1, 0]] and h = diag(h_q, h_p)
    M = np.block([[Z, pair.h_p], [-pair.h_q, Z]])
    lam = np.linalg.eigvals(M)
    nu2 = np.sort(np.abs(lam) ** 2)
    nu2 = np.where(nu2 < EPS, 0.0, nu2)
    # eigenvalues come in +- pairs
    return np.sqrt(nu2[0::2])


def ground_energy_symplectic(pair: HamiltonianPair) -> float:
    """Ground energy as the sum of normal-mode frequencies (each mode ``nu (q^2 + p^2)``)."""
    return float(symplectic_spectrum(pair).sum())


@dataclass(frozen=True)
class GroundStateCm:
    """Ground covariance blocks with the infinitely squeezed directions split off.

    ``kernel_q`` spans ``ker h_q`` (``gamma_q`` divergent, ``gamma_p`` zero);
    ``kernel_p`` spans ``ker h_p`` (``gamma_p`` divergent, ``gamma_q`` zero).
    ``gamma_q`` and ``gamma_p_finite`` are the blocks with the divergent
    directions projected out.  When ``h_q, h_p`` commute the joint eigenbasis
    and per-mode values are kept in ``modes``, ``q`` and ``p``.
    """

    gamma_q: np.ndarray = field(repr=False)
    gamma_p_finite: np.ndarray = field(repr=False)
    kernel_q: np.ndarray = field(repr=False)
    kernel_p: np.ndarray = field(repr=False)
    modes: np.ndarray | None = field(default=None, repr=False)
    q: np.ndarray | None = field(default=None, repr=False)
    p: np.ndarray | None = field(default=None, repr=False)

    @property
    def kernel_basis(self) -> np.ndarray:
        return np.hstack([self.kernel_q, self.kernel_p])


def _kernel(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return v[:, w < EPS * max(1.0, abs(w[-1]))]


def ground_cm(pair: HamiltonianPair) -> GroundStateCm:
    n = pair.n
    if pair.commute():
        # a generic combination separates the joint eigenspaces
        _, U = np.linalg.eigh(pair.h_q + math.sqrt(2.0) * pair.h_p)
        q = np.einsum("ik,ij,jk->k", U, pair.h_q, U)
        p = np.einsum("ik,ij,jk->k", U, pair.h_p, U)
        q = np.where(np.abs(q) < EPS, 0.0, q)
        p = np.where(np.abs(p) < EPS, 0.0, p)
        if np.any((q == 0) & (p == 0)):
            raise GaussianError("a mode has no restoring force in either quadrature")
        gq = np.zeros(n)
        gp = np.zeros(n)
        ok = (q > 0) & (p > 0)
        gq[ok] = np.sqrt(p[ok] / q[ok])
        gp[ok] = 1.0 / gq[ok]
        gamma_q = (U * gq) @ U.T
        gamma_p = (U * gp) @ U.T
        return GroundStateCm(gamma_q, gamma_p, U[:, q == 0], U[:, p == 0], U, q, p)

    ker_q, ker_p = _kernel(pair.h_q), _kernel(pair.h_p)
    if ker_q.size and ker_p.size:
        overlap = np.linalg.svd(ker_q.T @ ker_p, compute_uv=False)[0]
        if overlap > 1 - 1e-9:
            raise GaussianError("h_q and h_p share a kernel direction")
        if overlap > 1e-6:
            raise GaussianError("zero modes of h_q and h_p are not orthogonal; not supported")
    # gamma_q = h_q^-1 # h_p (matrix geometric mean), pseudo-inverting on the kernels
    w, v = np.linalg.eigh(pair.h_q)
    pos = w > EPS * max(1.0, abs(w[-1]))
    s = (v[:, pos] * np.sqrt(w[pos])) @ v[:, pos].T
    s_inv = (v[:, pos] / np.sqrt(w[pos])) @ v[:, pos].T
    gamma_q = s_inv @ _psd_sqrt(s @ pair.h_p @ s) @ s_inv
    gamma_q = 0.5 * (gamma_q + gamma_q.T)
    gw, gv = np.linalg.eigh(gamma_q)
    keep = gw > EPS
    gamma_p = (gv[:, keep] / gw[keep]) @ gv[:, keep].T
    return GroundStateCm(gamma_q, gamma_p, ker_q, ker_p)


def purity_residual(cm: GroundStateCm) -> float:
    """Max deviation of ``gamma_q gamma_p`` from the identity off both kernels."""
    K = cm.kernel_basis
    n = cm.gamma_q.shape[0]
    proj = np.eye(n) - (K @ K.T if K.size else 0.0)
    w, v = np.linalg.eigh(proj)
    C = v[:, w > 0.5]
    prod = C.T @ cm.gamma_q @ cm.gamma_p_finite @ C
    return float(np.max(np.abs(prod - np.eye(C.shape[1])), initial=0.0))


@dataclass(frozen=True)
class EprPair:
    """Variances of ``Q_a + s Q_b`` and ``P_a - s P_b`` and their geometric mean."""

    vq: float
    vp: float
    delta: float
    sign: int = 1
    divergent: bool = False

    @property
    def eof(self) -> float:
        return math.inf if self.divergent else eof_symmetric(self.delta)


def _quadratic(cm: GroundStateCm, u: np.ndarray, which: str) -> float:
    """``u^T gamma u / 2`` for ``which`` in {"q", "p"}; inf if ``u`` meets the divergent kernel."""
    diverging = cm.kernel_q if which == "q" else cm.kernel_p
    if diverging.size and np.max(np.abs(diverging.T @ u)) > OVERLAP_TOL:
        return math.inf
    if cm.modes is not None:
        c = cm.modes.T @ u
        vals = np.zeros_like(cm.q)
        ok = (cm.q > 0) & (cm.p > 0)
        vals[ok] = np.sqrt(cm.p[ok] / cm.q[ok]) if which == "q" else np.sqrt(cm.q[ok] / cm.p[ok])
        return 0.5 * float(np.sum(c[ok] ** 2 * vals[ok]))
    gamma = cm.gamma_q if which == "q" else cm.gamma_p_finite
    return 0.5 * float(u @ gamma @ u)


def _check_symmetric(g: Graph, allow_asymmetric: bool) -> None:
    if not graphs.is_connected(g):
        raise GaussianError(f"graph {g.tag} is disconnected")
    if not graphs.is_regular(g) or g.tag.startswith("star"):
        if not allow_asymmetric:
            raise NonTransitive(f"graph {g.tag} is not vertex-transitive")
        warnings.warn(f"graph {g.tag} is not vertex-transitive; EPR variances depend on the edge")
    elif not g.is_catalog:
        warnings.warn("user graph: edge- and vertex-transitivity are assumed, not checked")


def epr_from_cm(cm: GroundStateCm, a: int, b: int) -> EprPair:
    n = cm.gamma_q.shape[0]
    best = None
    for s in (1, -1):
        u = np.zeros(n)
        u[a], u[b] = 1.0, float(s)
        w = np.zeros(n)
        w[a], w[b] = 1.0, -float(s)
        vq, vp = _quadratic(cm, u, "q"), _quadratic(cm, w, "p")
        if math.isinf(vq) or math.isinf(vp):
            continue
        if best is None or vq * vp < best[0] * best[1]:
            best = (vq, vp, s)
    if best is None:
        raise Divergent("both EPR combinations meet a divergent kernel direction")
    vq, vp, s = best
    delta = math.sqrt(max(vq * vp, 0.0))
    return EprPair(vq, vp, delta, s, divergent=delta <= EPS)


def _ring_size(g: Graph) -> int | None:
    if g.tag.startswith("ring:"):
        return g.n
    return None


def ring_epr(n: int) -> EprPair:
    """Circulant closed form: ``vq = vp = (1/2n) sum_k 2|sin(2 pi k / n)|``."""
    if n < 3 or n > MAX_RING:
        raise GaussianError(f"ring size {n} outside [3, {MAX_RING}]")
    theta = 2 * np.pi * np.arange(n) / n
    v = float(np.sum(2 * np.abs(np.sin(theta)))) / (2 * n)
    return EprPair(v, v, v, 1, divergent=v <= EPS)


def ring_ground_energy(n: int) -> float:
    theta = 2 * np.pi * np.arange(n) / n
    return float(np.sum(2 * np.abs(np.sin(theta))))


def epr_variances(g: Graph, edge: tuple[int, int] | None = None, allow_asymmetric: bool = False) -> EprPair:
    """EPR variances across one edge of the optimal-Hamiltonian ground state.

    Rings use the circulant closed form; other graphs go through the dense
    eigendecomposition.  A vanishing product marks the pair ``divergent``.
    """
    _check_symmetric(g, allow_asymmetric)
    if not g.edges:
        raise GaussianError("graph has no edges")
    if _ring_size(g) is not None and edge is None:
        return ring_epr(g.n)
    if g.n > MAX_DENSE:
        raise GaussianError(f"{g.n} modes exceed the dense cap {MAX_DENSE}")
    a, b = edge if edge is not None else g.edges[0]
    return epr_from_cm(ground_cm(hamiltonian_pair(g)), a, b)


def eof_symmetric(delta: float) -> float:
    """Entanglement of formation (ebits) of a symmetric two-mode Gaussian state.

    ``c_pm = (delta**-0.5 +- delta**0.5)**2 / 4``, ``E = c+ log2 c+ - c- log2 c-``;
    zero for ``delta >= 1``.
    """
    if not delta > 0:
        raise GaussianError(f"delta must be positive, got {delta}")
    if delta >= 1.0:
        return 0.0
    cp = (delta**-0.5 + delta**0.5) ** 2 / 4
    cm = (delta**-0.5 - delta**0.5) ** 2 / 4
    return float(cp * math.log2(cp) - (cm * math.log2(cm) if cm > 0 else 0.0))


def max_nn_eof(g: Graph, edge: tuple[int, int] | None = None) -> float:
    return epr_variances(g, edge).eof


def ring_limit() -> tuple[float, float]:
    """``N -> inf`` ring: ``delta = (1/4pi) int_0^2pi 2|sin t| dt`` and its E_F."""
    val, _ = integrate.quad(lambda t: 2 * abs(math.sin(t)), 0.0, 2 * math.pi,
                            points=[math.pi], epsabs=0.0, epsrel=1e-13)
    delta = val / (4 * math.pi)
    return delta, eof_symmetric(delta)


def complete_delta(n: int) -> float:
    """Closed form for the permutation-invariant cluster: ``sqrt((n-2)/n)``."""
    return math.sqrt((n - 2) / n)


# --------------------------------------------------------------------------
# scans


@dataclass(frozen=True)
class CurveRow:
    N: int
    vq: float
    vp: float
    delta: float
    eof: float
    e0_per_mode: float

    def as_tuple(self):
        return (self.N, self.vq, self.vp, self.delta, self.eof, self.e0_per_mode)


FAMILIES = ("ring", "cluster", "hex_torus", "tri_torus", "platonic")


def family_graphs(family: str, n_min: int | None = None, n_max: int | None = None) -> Iterable[Graph]:
    """Catalog graphs of one family; ring/cluster sizes are vertex counts, torus sizes are side lengths."""
    if family == "platonic":
        yield from (graphs.platonic(name) for name in graphs.PLATONIC_NAMES)
        return
    if n_min is None or n_max is None:
        raise GaussianError(f"family {family!r} needs n_min and n_max")
    if family == "ring":
        yield from (graphs.ring(n) for n in range(max(n_min, 3), n_max + 1))
    elif family == "cluster":
        yield from (graphs.complete(n) for n in range(max(n_min, 2), n_max + 1))
    elif family == "hex_torus":
        yield from (graphs.hex_torus(L, L) for L in range(max(n_min, 2), n_max + 1))
    elif family == "tri_torus":
        yield from (graphs.tri_torus(L, L) for L in range(max(n_min, 3), n_max + 1))
    else:
        raise GaussianError(f"unknown family {family!r}; choose from {FAMILIES}")


def curve_row(g: Graph) -> CurveRow:
    pair = epr_variances(g)
    if _ring_size(g) is not None:
        e0 = ring_ground_energy(g.n)
    else:
        e0 = ground_energy(hamiltonian_pair(g))
    return CurveRow(g.n, pair.vq, pair.vp, pair.delta, pair.eof, e0 / g.n)


def scan(family: str, n_min: int | None = None, n_max: int | None = None) -> list[CurveRow]:
    """One row per graph in the family, ordered by vertex count."""
    rows = [curve_row(g) for g in family_graphs(family, n_min, n_max)]
    return sorted(rows, key=lambda r: r.N)


def fmt_number(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if math.isinf(x):
        return "inf"
    return f"{x:.12g}"


def write_curve_csv(rows: Sequence[CurveRow], fh, footer: Sequence[str] = ()) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([fmt_number(v) for v in r.as_tuple()])
    for line in footer:
        fh.write(f"# {line}\n")


def read_curve_csv(fh) -> list[CurveRow]:
    lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    reader = csv.reader(io.StringIO("".join(lines)))
    header = tuple(next(reader))
    if header != CSV_HEADER:
        raise GaussianError(f"unexpected header {header}")
    return [CurveRow(int(r[0]), *(float(v) for v in r[1:])) for r in reader]
