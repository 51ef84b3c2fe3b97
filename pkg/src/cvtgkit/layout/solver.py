"""Branch-and-bound over the pairwise separation binaries.

Each node solves the LP relaxation of the Big-M model with some binaries
fixed to one.  A relaxation whose boxes are already pairwise separated is
integer feasible (the Big-M rows of the unselected directions are slack),
so branching only happens on pairs that still overlap.
"""

from __future__ import annotations

import heapq
import itertools
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from . import formulation as F
from .model import (
    DIRECTIONS,
    BoundingBox,
    InfeasibleLayout,
    LayoutProblem,
    LayoutSolution,
    l1_objective,
    separated,
    separation_of,
)

BOUND_TOL = 1e-9
SEP_TOL = 1e-9
MAX_NODES = 200_000


class _Model:
    def __init__(self, problem: LayoutProblem):
        self.problem = problem
        n = problem.n
        self.pairs = list(itertools.combinations(range(n), 2))
        self.nbox = F.NV * n
        self.nvar = self.nbox + 4 * len(self.pairs)
        A_box, b_box = F.box_rows(problem)
        rows = [np.hstack([A_box, np.zeros((A_box.shape[0], self.nvar - self.nbox))])]
        rhs = [b_box]
        big_m = problem.big_m
        for p, (i, j) in enumerate(self.pairs):
            pick = np.zeros((1, self.nvar))
            for k, d in enumerate(DIRECTIONS):
                coefs, b = F.separation_row(problem, i, j, d)
                r = np.zeros((1, self.nvar))
                for c, v in coefs.items():
                    r[0, c] = v
                r[0, self.bvar(p, k)] = big_m
                rows.append(r)
                rhs.append([b + big_m])
                pick[0, self.bvar(p, k)] = -1.0
            rows.append(pick)
            rhs.append([-1.0])
        self.A = np.vstack(rows)
        self.b = np.concatenate([np.asarray(r, dtype=float).ravel() for r in rhs])
        self.base_bounds = [(0.0, 1.0)] * self.nvar

    def bvar(self, p: int, k: int) -> int:
        return self.nbox + 4 * p + k

    @staticmethod
    def boxes_of(problem: LayoutProblem, x: np.ndarray) -> List[BoundingBox]:
        return [
            BoundingBox(*(float(x[F.col(i, k)]) for k in (F.M_OFF, F.N_OFF, F.M_SC, F.N_SC)))
            for i in range(problem.n)
        ]

    def solve_node(self, c, fixed, extra_A, extra_b):
        bounds = list(self.base_bounds)
        for p, k in fixed:
            bounds[self.bvar(p, k)] = (1.0, 1.0)
        A, b = self.A, self.b
        if extra_A is not None:
            A = np.vstack([A, extra_A])
            b = np.concatenate([b, extra_b])
        res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
        if res.status != 0:
            return None
        return float(res.fun), res.x

    def overlapping_pair(self, x) -> Optional[int]:
        boxes = self.boxes_of(self.problem, x)
        for p, (i, j) in enumerate(self.pairs):
            if not any(separated(boxes[i], boxes[j], d, SEP_TOL) for d in DIRECTIONS):
                return p
        return None


def _branch_and_bound(model: _Model, c, extra_A=None, extra_b=None):
    """Best-first search; returns ``(fun, x)`` or ``(inf, None)`` when infeasible."""
    best_fun, best_x = np.inf, None
    counter = itertools.count()
    root = model.solve_node(c, (), extra_A, extra_b)
    if root is None:
        return best_fun, best_x
    heap = [(root[0], next(counter), (), root[1])]
    nodes = 0
    while heap:
        bound, _, fixed, x = heapq.heappop(heap)
        if bound >= best_fun - BOUND_TOL:
            continue
        nodes += 1
        if nodes > MAX_NODES:
            raise RuntimeError("branch-and-bound node limit exceeded")
        p = model.overlapping_pair(x)
        if p is None:
            best_fun, best_x = bound, x
            continue
        for k in range(len(DIRECTIONS)):
            child = fixed + ((p, k),)
            sol = model.solve_node(c, child, extra_A, extra_b)
            if sol is not None and sol[0] < best_fun - BOUND_TOL:
                heapq.heappush(heap, (sol[0], next(counter), child, sol[1]))
    return best_fun, best_x


def _lex_order(problem: LayoutProblem) -> List[int]:
    order = []
    for i in range(problem.n):
        order += [F.col(i, F.M_OFF), F.col(i, F.N_OFF)]
    for i in range(problem.n):
        order += [F.col(i, F.M_SC), F.col(i, F.N_SC)]
    return order


def _refine(problem: LayoutProblem, x: np.ndarray, fun: float) -> np.ndarray:
    """Lexicographically smallest optimum within the separation pattern of ``x``.

    The pattern is frozen as hard rows, the objective is capped at its
    optimum, and offsets then scales are minimized one at a time.
    """
    nv = F.NV * problem.n
    A_box, b_box = F.box_rows(problem)
    rows, rhs = [A_box], list(b_box)
    for i, j, d in separation_of(_Model.boxes_of(problem, x), SEP_TOL):
        coefs, b = F.separation_row(problem, i, j, d)
        r = np.zeros(nv)
        for k, v in coefs.items():
            r[k] = v
        rows.append(r[None, :])
        rhs.append(b)
    c = F.objective(problem)
    rows.append(c[None, :])
    rhs.append(fun + BOUND_TOL)
    best = x[:nv]
    for v in _lex_order(problem):
        cv = np.zeros(nv)
        cv[v] = 1.0
        res = linprog(cv, A_ub=np.vstack(rows), b_ub=np.array(rhs), bounds=[(0.0, 1.0)] * nv, method="highs")
        if res.status != 0:
            # numerically tight cap; keep the last good point
            break
        best = res.x
        rows.append(cv[None, :])
        rhs.append(float(res.x[v]) + BOUND_TOL)
    return best


def solve_layout(problem: LayoutProblem, tie_break: bool = True) -> LayoutSolution:
    """Globally optimal box placement for the linearized program.

    Ties are broken toward the lexicographically smallest offsets, then
    scales, box by box, inside the separation pattern branch-and-bound
    settled on.
    """
    F.check_single_box(problem)
    model = _Model(problem)
    c = np.zeros(model.nvar)
    c[: model.nbox] = F.objective(problem)
    fun, x = _branch_and_bound(model, c)
    if x is None:
        raise InfeasibleLayout("non-overlap", "no separation pattern admits a feasible layout")
    if tie_break:
        x = _refine(problem, x, fun)
    boxes = _clean(_Model.boxes_of(problem, x))
    return LayoutSolution(tuple(boxes), l1_objective(boxes, problem.targets), separation_of(boxes))


def _clean(boxes: Sequence[BoundingBox]) -> List[BoundingBox]:
    """Snap LP output to an 1e-8 grid and back inside the unit square.

    HiGHS works to ~1e-7 feasibility, so digits below that are noise.
    """
    out = []
    for b in boxes:
        w = min(1.0, max(0.0, round(b.m_scale, 8)))
        h = min(1.0, max(0.0, round(b.n_scale, 8)))
        x = min(1.0 - w, max(0.0, round(b.m_offset, 8)))
        y = min(1.0 - h, max(0.0, round(b.n_offset, 8)))
        out.append(BoundingBox(x, y, w, h))
    return out
