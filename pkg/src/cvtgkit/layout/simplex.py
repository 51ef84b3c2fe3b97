"""Dense two-phase tableau simplex for ``min c.x  s.t.  A x <= b, x >= 0``.

Small and self-contained; used by the exhaustive layout oracle so that it
does not share an LP engine with the branch-and-bound solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

TOL = 1e-9
OPTIMAL, INFEASIBLE, UNBOUNDED, ITERATION_LIMIT = 0, 2, 3, 1


@dataclass
class LPResult:
    status: int
    x: Optional[np.ndarray]
    fun: float

    @property
    def success(self) -> bool:
        return self.status == OPTIMAL


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run(T: np.ndarray, basis: np.ndarray, ncols: int, max_iter: int) -> int:
    """Minimize the objective in the last row over the first ``ncols`` columns."""
    m = T.shape[0] - 1
    stall = 0
    last = T[-1, -1]
    for _ in range(max_iter):
        red = T[-1, :ncols]
        if stall > 30:
            # Bland's rule once progress stalls; guarantees termination
            cand = np.flatnonzero(red < -TOL)
            if cand.size == 0:
                return OPTIMAL
            c = int(cand[0])
        else:
            c = int(np.argmin(red))
            if red[c] >= -TOL:
                return OPTIMAL
        colv = T[:m, c]
        pos = colv > TOL
        if not np.any(pos):
            return UNBOUNDED
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / colv[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + TOL)
        r = int(ties[np.argmin(basis[ties])])
        _pivot(T, r, c)
        basis[r] = c
        # the corner cell holds -objective, so progress raises it
        if T[-1, -1] > last + TOL:
            stall = 0
        else:
            stall += 1
        last = T[-1, -1]
    return ITERATION_LIMIT


def linprog(c, A_ub, b_ub, max_iter: int = 20000) -> LPResult:
    c = np.asarray(c, dtype=np.float64)
    A = np.asarray(A_ub, dtype=np.float64)
    b = np.asarray(b_ub, dtype=np.float64)
    m, n = A.shape
    neg = b < 0
    # row signs so every right-hand side is non-negative
    sign = np.where(neg, -1.0, 1.0)
    n_art = int(neg.sum())
    ncols = n + m + n_art
    T = np.zeros((m + 1, ncols + 1))
    T[:m, :n] = A * sign[:, None]
    T[:m, n : n + m] = np.diag(sign)
    T[:m, -1] = b * sign
    basis = np.empty(m, dtype=np.int64)
    art_rows = np.flatnonzero(neg)
    for k, r in enumerate(art_rows):
        T[r, n + m + k] = 1.0
        basis[r] = n + m + k
    slack_rows = np.flatnonzero(~neg)
    basis[slack_rows] = n + slack_rows

    if n_art:
        # phase 1: minimize the sum of artificials, expressed in non-basic terms
        T[-1, :] = 0.0
        T[-1, -1] = 0.0
        for r in art_rows:
            T[-1, :] -= T[r, :]
        T[-1, n + m :ncols] = 0.0
        status = _run(T, basis, ncols, max_iter)
        if status == ITERATION_LIMIT:
            return LPResult(status, None, np.nan)
        if -T[-1, -1] > 1e-7:
            return LPResult(INFEASIBLE, None, np.nan)
        # drive degenerate artificials out of the basis
        for r in range(m):
            if basis[r] >= n + m:
                nz = np.flatnonzero(np.abs(T[r, : n + m]) > TOL)
                if nz.size:
                    _pivot(T, r, int(nz[0]))
                    basis[r] = int(nz[0])
        T = np.delete(T, np.s_[n + m : ncols], axis=1)
        ncols = n + m
        keep = basis < ncols
        # redundant rows with a stuck artificial carry no information
        T = np.vstack([T[:m][keep], T[-1:]])
        basis = basis[keep]
        m = basis.size

    T[-1, :] = 0.0
    T[-1, :n] = c
    for r in range(m):
        cb = T[-1, basis[r]]
        if cb != 0.0:
            T[-1, :] -= cb * T[r, :]
    status = _run(T, basis, ncols, max_iter)
    if status != OPTIMAL:
        return LPResult(status, None, np.nan)
    x = np.zeros(ncols)
    x[basis] = T[:m, -1]
    x = x[:n]
    return LPResult(OPTIMAL, x, float(c @ x))
