"""Non-overlapping box layout by mixed-integer linear programming."""

from .masks import box_mask, boxes_to_masks
from .model import (
    DIRECTIONS,
    BoundingBox,
    InfeasibleLayout,
    LayoutError,
    LayoutProblem,
    LayoutSolution,
    l1_objective,
)
from .oracle import enumerate_layout
from .solver import solve_layout
from .verify import Verification, verify_layout

__all__ = [
    "DIRECTIONS",
    "BoundingBox",
    "InfeasibleLayout",
    "LayoutError",
    "LayoutProblem",
    "LayoutSolution",
    "Verification",
    "box_mask",
    "boxes_to_masks",
    "enumerate_layout",
    "l1_objective",
    "solve_layout",
    "verify_layout",
]
