"""Phase-I simplex for ``A x = b, x >= 0`` with Bland's rule.

Dense tableau on 64-bit floats.  The phase-I problem adds one artificial
per row and minimises their sum; an optimum above ``feas_tol`` proves
infeasibility, and the optimal duals ``y`` then satisfy ``y @ A <= 0`` and
``y @ b > 0`` (a Farkas certificate).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-8
PIVOT_TOL = 1e-11
COST_TOL = 1e-11


class SimplexError(RuntimeError):
    pass


@dataclass
class PhaseOneResult:
    feasible: bool
    x: np.ndarray          # primal point (only meaningful when feasible)
    y: np.ndarray          # phase-I duals, one per row
    infeasibility: float   # optimal sum of artificials
    pivots: int


def phase_one(A, b, feas_tol: float = FEAS_TOL, max_pivots: int | None = None) -> PhaseOneResult:
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    m, n = A.shape
    if b.shape != (m,):
        raise SimplexError(f"b has shape {b.shape}, expected ({m},)")
    A = A.copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    sign = np.where(neg, -1.0, 1.0)

    # columns: x_0..x_{n-1}, artificials n..n+m-1
    T = np.zeros((m, n + m))
    T[:, :n] = A
    T[:, n:] = np.eye(m)
    rhs = b.copy()
    basis = np.arange(n, n + m)
    cost = np.zeros(n + m)
    cost[n:] = 1.0
    # reduced costs r = c - c_B B^-1 T
    r = cost - T.sum(axis=0)

    if max_pivots is None:
        max_pivots = 50 * (n + m)
    pivots = 0
    while True:
        neg_cols = np.flatnonzero(r < -COST_TOL)
        if neg_cols.size == 0:
            break
        j = int(neg_cols[0])
        col = T[:, j]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            # cannot happen for phase I: objective is bounded below by 0
            raise SimplexError("phase-I objective unbounded")
        ratios = rhs[rows] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-14 * max(1.0, abs(best))]
        i = int(ties[np.argmin(basis[ties])])

        piv = T[i, j]
        T[i] /= piv
        rhs[i] /= piv
        f = T[:, j].copy()
        f[i] = 0.0
        T -= np.outer(f, T[i])
        rhs -= f * rhs[i]
        rj = r[j]
        r -= rj * T[i]
        basis[i] = j
        np.maximum(rhs, 0.0, out=rhs)
        pivots += 1
        if pivots > max_pivots:
            raise SimplexError(f"no convergence after {pivots} pivots")

    x = np.zeros(n + m)
    x[basis] = rhs
    infeas = float(x[n:].sum())
    # reduced cost of artificial i is 1 - y_i
    y = (1.0 - r[n:]) * sign
    return PhaseOneResult(infeas <= feas_tol, x[:n], y, infeas, pivots)
