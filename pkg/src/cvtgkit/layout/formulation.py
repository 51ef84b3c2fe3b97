"""Linear constraint rows shared by the branch-and-bound solver and the oracle.

Variables per box ``i`` occupy columns ``6*i .. 6*i+5`` in the order
``m_offset, n_offset, m_scale, n_scale, |dx|, |dy|``.  Separation rows are
added separately because the two solvers encode them differently.
"""

from __future__ import annotations

import math
from typing import List, Tuple

import numpy as np

from .model import InfeasibleLayout, LayoutProblem

NV = 6
M_OFF, N_OFF, M_SC, N_SC, ABS_X, ABS_Y = range(NV)


def col(i: int, k: int) -> int:
    return NV * i + k


def height_range(problem: LayoutProblem) -> Tuple[float, float]:
    """Feasible box heights: area and aspect force ``h >= sqrt(a_min / r_max)``."""
    lo = math.sqrt(problem.a_min / problem.r_max)
    # width r_min*h must also fit, and height itself is at most 1
    hi = min(1.0, 1.0 / problem.r_min)
    return lo, hi


def chord_breakpoints(problem: LayoutProblem) -> np.ndarray:
    lo, _ = height_range(problem)
    # geometric spacing suits the 1/h curvature; endpoints are exact
    pts = np.geomspace(lo, 1.0, problem.area_cuts + 1)
    pts[0], pts[-1] = lo, 1.0
    return pts


def check_single_box(problem: LayoutProblem) -> None:
    """Raise when no single box can satisfy area and aspect bounds at all."""
    if problem.n * problem.a_min > 1 + 1e-12:
        raise InfeasibleLayout("area", f"{problem.n} boxes of area {problem.a_min} exceed the unit square")
    lo, hi = height_range(problem)
    if lo > hi + 1e-12:
        raise InfeasibleLayout("aspect", "no box height satisfies both area and aspect bounds")
    # largest achievable area under the aspect bounds
    h = hi
    w = min(1.0, problem.r_max * h)
    if w * h < problem.a_min - 1e-12:
        raise InfeasibleLayout("area", "a_min exceeds the largest box the aspect bounds allow")


def box_rows(problem: LayoutProblem) -> Tuple[np.ndarray, np.ndarray]:
    """``A_ub x <= b_ub`` rows for boundary, area cuts, aspect and |d| linearization."""
    n = problem.n
    nv = NV * n
    rows: List[np.ndarray] = []
    rhs: List[float] = []

    def add(coefs: dict, b: float):
        r = np.zeros(nv)
        for c, v in coefs.items():
            r[c] += v
        rows.append(r)
        rhs.append(b)

    pts = chord_breakpoints(problem)
    a = problem.a_min
    lo, _ = height_range(problem)
    for i, (px, py) in enumerate(problem.targets):
        x, y, w, h = col(i, M_OFF), col(i, N_OFF), col(i, M_SC), col(i, N_SC)
        ax, ay = col(i, ABS_X), col(i, ABS_Y)
        add({x: 1, w: 1}, 1.0)
        add({y: 1, h: 1}, 1.0)
        add({h: -1}, -lo)
        # w >= chord through (h_k, a/h_k) and (h_k+1, a/h_k+1)
        for h0, h1 in zip(pts[:-1], pts[1:]):
            slope = -a / (h0 * h1)
            add({w: -1, h: slope}, slope * h0 - a / h0)
        add({h: problem.r_min, w: -1}, 0.0)
        add({w: 1, h: -problem.r_max}, 0.0)
        add({x: 1, w: 0.5, ax: -1}, px)
        add({x: -1, w: -0.5, ax: -1}, -px)
        add({y: 1, h: 0.5, ay: -1}, py)
        add({y: -1, h: -0.5, ay: -1}, -py)
    return np.array(rows), np.array(rhs)


def separation_row(problem: LayoutProblem, i: int, j: int, direction: str) -> Tuple[dict, float]:
    """Hard separation ``lhs <= 0`` for pair (i, j) as a sparse coefficient dict."""
    if direction == "left":
        return {col(i, M_OFF): 1, col(i, M_SC): 1, col(j, M_OFF): -1}, 0.0
    if direction == "right":
        return {col(j, M_OFF): 1, col(j, M_SC): 1, col(i, M_OFF): -1}, 0.0
    if direction == "above":
        return {col(i, N_OFF): 1, col(i, N_SC): 1, col(j, N_OFF): -1}, 0.0
    if direction == "below":
        return {col(j, N_OFF): 1, col(j, N_SC): 1, col(i, N_OFF): -1}, 0.0
    raise ValueError(f"unknown direction {direction!r}")


def objective(problem: LayoutProblem) -> np.ndarray:
    c = np.zeros(NV * problem.n)
    for i in range(problem.n):
        c[col(i, ABS_X)] = 1.0
        c[col(i, ABS_Y)] = 1.0
    return c


def upper_bounds(problem: LayoutProblem) -> np.ndarray:
    return np.ones(NV * problem.n)
