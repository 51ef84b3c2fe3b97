from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

from .model import LayoutProblem, LayoutSolution, l1_objective

TOL = 1e-6


@dataclass(frozen=True)
class Verification:
    ok: bool
    violations: List[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def verify_layout(solution: LayoutSolution, problem: LayoutProblem, tol: float = TOL) -> Verification:
    """Check a layout against the original (bilinear-area) constraints."""
    problems = []
    boxes = solution.boxes
    if len(boxes) != problem.n:
        problems.append(f"count: {len(boxes)} boxes for {problem.n} targets")
    for i, b in enumerate(boxes):
        if min(b.to_list()) < -tol:
            problems.append(f"containment: box {i} has a negative component")
        if b.m_offset + b.m_scale > 1 + tol or b.n_offset + b.n_scale > 1 + tol:
            problems.append(f"containment: box {i} leaves the unit square")
        if b.area < problem.a_min - tol:
            problems.append(f"min-area: box {i} has area {b.area:.6g} < {problem.a_min:.6g}")
        if b.m_scale < problem.r_min * b.n_scale - tol or b.m_scale > problem.r_max * b.n_scale + tol:
            problems.append(f"aspect: box {i} has width {b.m_scale:.6g} and height {b.n_scale:.6g}")
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            a, b = boxes[i], boxes[j]
            overlap_x = min(a.m_offset + a.m_scale, b.m_offset + b.m_scale) - max(a.m_offset, b.m_offset)
            overlap_y = min(a.n_offset + a.n_scale, b.n_offset + b.n_scale) - max(a.n_offset, b.n_offset)
            if overlap_x > tol and overlap_y > tol:
                problems.append(f"non-overlap: boxes {i} and {j} intersect")
    if len(boxes) == problem.n:
        true_obj = l1_objective(boxes, problem.targets)
        if abs(true_obj - solution.objective) > tol:
            problems.append(f"objective: reported {solution.objective:.9g}, recomputed {true_obj:.9g}")
    return Verification(not problems, problems)
