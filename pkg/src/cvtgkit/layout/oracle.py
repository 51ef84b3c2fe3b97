"""Exhaustive direction enumeration: one pure LP per separation pattern.

Independent of the branch-and-bound path (own simplex, hard separation
rows instead of Big-M), so it serves as a reference for small ``n``.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import formulation as F
from .model import DIRECTIONS, BoundingBox, InfeasibleLayout, LayoutProblem, LayoutSolution, l1_objective
from .simplex import linprog

MAX_ENUMERATION_BOXES = 4


def enumerate_layout(problem: LayoutProblem) -> LayoutSolution:
    if problem.n > MAX_ENUMERATION_BOXES:
        raise ValueError(f"enumeration is limited to n <= {MAX_ENUMERATION_BOXES}")
    F.check_single_box(problem)
    A_box, b_box = F.box_rows(problem)
    c = F.objective(problem)
    nv = A_box.shape[1]
    pairs = list(itertools.combinations(range(problem.n), 2))
    best = None
    for pattern in itertools.product(DIRECTIONS, repeat=len(pairs)):
        rows, rhs = [A_box], [b_box]
        for (i, j), d in zip(pairs, pattern):
            coefs, b = F.separation_row(problem, i, j, d)
            r = np.zeros((1, nv))
            for k, v in coefs.items():
                r[0, k] = v
            rows.append(r)
            rhs.append([b])
        res = linprog(c, np.vstack(rows), np.concatenate([np.ravel(r) for r in rhs]))
        if res.success and (best is None or res.fun < best[0] - 1e-12):
            best = (res.fun, res.x, pattern)
    if best is None:
        raise InfeasibleLayout("non-overlap", "every separation pattern is infeasible")
    fun, x, pattern = best
    boxes = tuple(
        BoundingBox(*(float(x[F.col(i, k)]) for k in (F.M_OFF, F.N_OFF, F.M_SC, F.N_SC)))
        for i in range(problem.n)
    )
    sep = tuple((i, j, d) for (i, j), d in zip(pairs, pattern))
    return LayoutSolution(boxes, l1_objective(boxes, problem.targets), sep)
