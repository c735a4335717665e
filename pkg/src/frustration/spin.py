"""Qubit entanglement under graph symmetry.

Maximal singlet fraction from the ground energy of ``-sum_edges P_singlet``,
two-qubit concurrence (closed form and the variational SL(2,C) form), and
the entanglement curve of permutation-invariant qubit clusters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize, sparse

from .graphs import Graph
from .quantum import PAULI_X, PAULI_Y, PAULI_Z, DensityOp

MAX_QUBITS = 14
RESIDUAL_TOL = 1e-8
DEFAULT_RESTARTS = 32
FD_STEP = 1e-6

SIGMA_YY = np.kron(PAULI_Y, PAULI_Y)
FLIP = np.eye(4)[[0, 2, 1, 3]]


class SpinError(ValueError):
    pass


class TooManyQubits(SpinError):
    pass


class NotConverged(RuntimeError):
    def __init__(self, msg, best):
        super().__init__(msg)
        self.best = best


def singlet_projector() -> np.ndarray:
    """``(1 - XX - YY - ZZ) / 4``, the projector onto ``(|01> - |10>)/sqrt 2``."""
    return 0.25 * (
        np.eye(4) - np.kron(PAULI_X, PAULI_X) - np.kron(PAULI_Y, PAULI_Y) - np.kron(PAULI_Z, PAULI_Z)
    )


def _conserves_magnetisation(h: np.ndarray) -> bool:
    weight = np.array([0, 1, 1, 2])
    mask = weight[:, None] != weight[None, :]
    return bool(np.all(np.abs(h[mask]) < 1e-14))


@dataclass(frozen=True)
class SpinHamiltonian:
    """``sum_edges two_site`` on ``graph.n`` qubits, stored sparse.

    Qubit ``0`` is the most significant bit of the basis index.
    """

    graph: Graph
    two_site: np.ndarray = field(repr=False)
    assembled: sparse.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        h = np.asarray(self.two_site, dtype=complex)
        if h.shape != (4, 4) or np.max(np.abs(h - h.conj().T)) > 1e-10:
            raise SpinError("two-site block must be a 4x4 Hermitian matrix")
        n = self.graph.n
        if n > MAX_QUBITS:
            raise TooManyQubits(f"{n} qubits exceed the dense cap of {MAX_QUBITS}")
        if np.max(np.abs(h.imag)) == 0:
            h = h.real
        object.__setattr__(self, "two_site", h)
        object.__setattr__(self, "assembled", _assemble(h, self.graph))

    @property
    def n(self) -> int:
        return self.graph.n


def _assemble(h: np.ndarray, g: Graph) -> sparse.csr_matrix:
    n = g.n
    dim = 2**n
    states = np.arange(dim)
    rows, cols, vals = [], [], []
    for i, j in g.edges:
        bi = (states >> (n - 1 - i)) & 1
        bj = (states >> (n - 1 - j)) & 1
        pair_in = 2 * bi + bj
        rest = states & ~((1 << (n - 1 - i)) | (1 << (n - 1 - j)))
        for out in range(4):
            amp = h[out, pair_in]
            nz = amp != 0
            new = rest[nz] | ((out >> 1) << (n - 1 - i)) | ((out & 1) << (n - 1 - j))
            rows.append(new)
            cols.append(states[nz])
            vals.append(amp[nz])
    return sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()


def ground_energy(h: SpinHamiltonian) -> tuple[float, np.ndarray]:
    """Lowest eigenvalue and a normalised eigenvector, by dense diagonalisation.

    When the two-site block conserves the number of up spins the matrix is
    diagonalised one magnetisation sector at a time (still dense).
    """
    n = h.n
    dim = 2**n
    H = h.assembled
    if _conserves_magnetisation(h.two_site):
        pop = np.array([bin(s).count("1") for s in range(dim)])
        best = (math.inf, None, None)
        for k in range(n + 1):
            idx = np.flatnonzero(pop == k)
            block = H[idx][:, idx].toarray()
            w, v = np.linalg.eigh(block)
            if w[0] < best[0]:
                best = (w[0], v[:, 0], idx)
        e0, vec_s, idx = best
        vec = np.zeros(dim, dtype=vec_s.dtype)
        vec[idx] = vec_s
    else:
        w, v = np.linalg.eigh(H.toarray())
        e0, vec = w[0], v[:, 0]
    resid = np.linalg.norm(H @ vec - e0 * vec)
    if resid > RESIDUAL_TOL:
        raise SpinError(f"eigenvector residual {resid:.2e} above {RESIDUAL_TOL}")
    return float(e0), vec


def max_singlet_fraction(g: Graph) -> float:
    """``-e0 / |E|`` for ``H = -sum_edges |singlet><singlet|``."""
    if not g.edges:
        raise SpinError("graph has no edges")
    e0, _ = ground_energy(SpinHamiltonian(g, -singlet_projector()))
    return -e0 / len(g.edges)


def singlet_fraction(rho_ab: np.ndarray) -> float:
    return float(np.real(np.trace(singlet_projector() @ rho_ab)))


def extrapolate_inverse_square(ns: Sequence[int], values: Sequence[float]) -> tuple[float, float]:
    """Least-squares fit of ``f(n) = f_inf + a / n**2``; returns ``(f_inf, a)``."""
    ns = np.asarray(ns, dtype=float)
    X = np.column_stack([np.ones_like(ns), 1.0 / ns**2])
    (f_inf, a), *_ = np.linalg.lstsq(X, np.asarray(values, dtype=float), rcond=None)
    return float(f_inf), float(a)


# --------------------------------------------------------------------------
# concurrence


def _matrix(rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityOp) else np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise SpinError(f"expected a two-qubit state, got shape {m.shape}")
    return m


def _wootters_gap(m: np.ndarray) -> float:
    # lambda_i are the singular values of sqrt(rho) sqrt(rho~), and sqrt(rho~) = YY sqrt(rho)* YY;
    # this avoids square roots of round-off for rank-deficient states
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    lam = np.linalg.svd(root @ SIGMA_YY @ root.conj(), compute_uv=False)
    return float(lam[0] - lam[1] - lam[2] - lam[3])


def concurrence_wootters(rho) -> float:
    """Wootters' concurrence ``max(0, l1 - l2 - l3 - l4)``."""
    return max(0.0, _wootters_gap(_matrix(rho)))


def _sl2(params: np.ndarray) -> np.ndarray:
    """``exp(M)`` for traceless ``M = [[a, b], [c, -a]]``; ``params`` is ``(..., 6)``.

    Uses ``M**2 = (a**2 + bc) 1``, so ``exp(M) = cosh(s) 1 + sinh(s)/s M``.
    """
    p = np.asarray(params, dtype=float)
    a = p[..., 0] + 1j * p[..., 1]
    b = p[..., 2] + 1j * p[..., 3]
    c = p[..., 4] + 1j * p[..., 5]
    s = np.sqrt(a * a + b * c)
    small = np.abs(s) < 1e-6
    safe = np.where(small, 1.0, s)
    sinhc = np.where(small, 1 + s * s / 6, np.sinh(safe) / safe)
    ch = np.cosh(s)
    X = np.empty(p.shape[:-1] + (2, 2), dtype=complex)
    X[..., 0, 0] = ch + sinhc * a
    X[..., 0, 1] = sinhc * b
    X[..., 1, 0] = sinhc * c
    X[..., 1, 1] = ch - sinhc * a
    return X


def flip_functional(rho, X: np.ndarray) -> np.ndarray | float:
    """``Re tr[rho (X (x) X^dagger) F]``, broadcasting over leading axes of ``X``.

    ``<ij|(X (x) Y) F|kl> = X_il Y_jk``, so the trace is
    ``sum rho[kl, ij] X[i, l] Y[j, k]`` with ``Y = X^dagger``.
    """
    m = _matrix(rho).reshape(2, 2, 2, 2)
    Y = np.conj(np.swapaxes(X, -1, -2))
    val = np.einsum("klij,...il,...jk->...", m, X, Y).real
    return float(val) if np.ndim(val) == 0 else val


def _central_grad(f_batch, x, step=FD_STEP):
    k = x.size
    pts = np.concatenate([x + step * np.eye(k), x - step * np.eye(k)])
    vals = f_batch(pts)
    return (vals[:k] - vals[k:]) / (2 * step)


def concurrence_variational(
    rho, restarts: int = DEFAULT_RESTARTS, seed: int = 0, scale: float = 0.5, strict: bool = False
) -> float:
    """Concurrence as ``max(0, -inf_{det X = 1} Re tr[rho (X (x) X^dagger) F])``.

    ``X = exp(M)`` with ``M`` traceless; each restart runs a quasi-Newton
    descent on central-difference gradients from a random ``M`` (the first
    restart starts at ``X = 1``).  With ``strict=True`` a run in which no
    restart converges raises :class:`NotConverged` carrying the best value.
    """
    m = _matrix(rho)
    rng = np.random.default_rng(seed)

    def f_batch(P):
        vals = flip_functional(m, _sl2(P))
        return np.where(np.isfinite(vals), vals, 1e6)

    def f(p):
        return float(f_batch(p[None, :])[0])

    best = math.inf
    failures = 0
    for r in range(restarts):
        x0 = np.zeros(6) if r == 0 else rng.normal(scale=scale, size=6)
        res = optimize.minimize(
            f, x0, jac=lambda p: _central_grad(f_batch, p), method="BFGS",
            options={"gtol": 1e-7, "maxiter": 400},
        )
        if not res.success:
            failures += 1
        best = min(best, float(res.fun))
    if strict and failures == restarts:
        raise NotConverged("no restart converged", max(0.0, -best))
    return max(0.0, -best)


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * math.log2(x) - (1 - x) * math.log2(1 - x))


def eof_from_concurrence(c: float) -> float:
    """Entanglement of formation (ebits) of a two-qubit state with concurrence ``c``."""
    if not (0.0 <= c <= 1.0 + 1e-12):
        raise SpinError(f"concurrence {c} outside [0, 1]")
    c = min(c, 1.0)
    return binary_entropy((1 + math.sqrt(1 - c * c)) / 2)


def cluster_concurrence(n: int) -> float:
    """Largest pairwise concurrence in a permutation-invariant ``n``-qubit state."""
    if n < 2:
        raise SpinError("cluster needs at least two qubits")
    return 2.0 / n


def qubit_cluster_curve(n_max: int, n_min: int = 2) -> list[tuple[int, float, float]]:
    """Rows ``(N, concurrence, eof)`` for ``N = n_min..n_max``."""
    if n_max < 2:
        raise SpinError("n_max must be at least 2")
    return [(n, cluster_concurrence(n), eof_from_concurrence(cluster_concurrence(n)))
            for n in range(max(2, n_min), n_max + 1)]


def pair_reductions(psi: np.ndarray, n: int) -> np.ndarray:
    """Average two-qubit reduction of ``|psi>`` over all ordered pairs of distinct qubits.

    This is the pair state of the fully symmetrised (twirled) ``|psi><psi|``.
    """
    t = psi.reshape((2,) * n)
    acc = np.zeros((4, 4), dtype=complex)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            rest = [k for k in range(n) if k not in (i, j)]
            v = np.transpose(t, [i, j] + rest).reshape(4, -1)
            acc += v @ v.conj().T
    return acc / (n * (n - 1))


def dicke_basis(n: int) -> np.ndarray:
    """Rows are the normalised Dicke states ``|D_k>``, ``k`` up spins, ``k = 0..n``."""
    pop = np.array([bin(s).count("1") for s in range(2**n)])
    D = (pop[None, :] == np.arange(n + 1)[:, None]).astype(float)
    return D / np.linalg.norm(D, axis=1, keepdims=True)


def max_symmetric_concurrence(n: int, restarts: int = 6, seed: int = 0) -> float:
    """Numerical maximum of pair concurrence over symmetric ``n``-qubit pure states.

    The search runs over superpositions of Dicke states; for these every pair
    reduction is the same, so qubits 0 and 1 are used.  The unclamped
    Wootters gap is optimised so separable starting points still see a slope.
    """
    rng = np.random.default_rng(seed)
    D = dicke_basis(n)

    def neg_c(x):
        psi = (x[: n + 1] + 1j * x[n + 1:]) @ D
        nrm = np.linalg.norm(psi)
        if nrm < 1e-12:
            return 0.0
        v = (psi / nrm).reshape(4, -1)
        return -_wootters_gap(v @ v.conj().T)

    best = 0.0
    for _ in range(restarts):
        res = optimize.minimize(neg_c, rng.normal(size=2 * n + 2), method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 20000, "maxfev": 20000})
        best = max(best, -float(res.fun))
    return best
