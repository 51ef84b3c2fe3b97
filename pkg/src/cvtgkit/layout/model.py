from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

MAX_BOXES = 8
DIRECTIONS = ("left", "right", "above", "below")


class LayoutError(ValueError):
    """Malformed layout problem."""


class InfeasibleLayout(Exception):
    """No layout satisfies the constraints; ``family`` names the culprit."""

    def __init__(self, family: str, detail: str = ""):
        self.family = family
        self.detail = detail
        super().__init__(f"infeasible: {family}" + (f" ({detail})" if detail else ""))


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in unit-square coordinates, origin at the bottom-left."""

    m_offset: float
    n_offset: float
    m_scale: float
    n_scale: float

    @classmethod
    def from_list(cls, vals: Sequence[float]) -> "BoundingBox":
        if len(vals) != 4:
            raise LayoutError(f"bounding box needs 4 numbers, got {len(vals)}")
        box = cls(*(float(v) for v in vals))
        box.check()
        return box

    def to_list(self) -> List[float]:
        return [self.m_offset, self.n_offset, self.m_scale, self.n_scale]

    def check(self, tol: float = 1e-9) -> None:
        if min(self.to_list()) < -tol:
            raise LayoutError(f"bounding box has a negative component: {self.to_list()}")
        if self.m_offset + self.m_scale > 1 + tol or self.n_offset + self.n_scale > 1 + tol:
            raise LayoutError(f"bounding box leaves the unit square: {self.to_list()}")

    @property
    def center(self) -> Tuple[float, float]:
        return (self.m_offset + self.m_scale / 2, self.n_offset + self.n_scale / 2)

    @property
    def area(self) -> float:
        return self.m_scale * self.n_scale


def default_a_min(n: int) -> float:
    # boxes jointly cover at least a quarter of the canvas
    return 0.5 / (2 * n)


@dataclass(frozen=True)
class LayoutProblem:
    targets: Tuple[Tuple[float, float], ...]
    a_min: Optional[float] = None
    r_min: float = 1.0
    r_max: float = 6.0
    big_m: float = 1.0
    area_cuts: int = 16

    def __post_init__(self):
        targets = tuple((float(x), float(y)) for x, y in self.targets)
        object.__setattr__(self, "targets", targets)
        n = len(targets)
        if not 1 <= n <= MAX_BOXES:
            raise LayoutError(f"number of boxes must be in [1, {MAX_BOXES}], got {n}")
        for x, y in targets:
            if not (0 <= x <= 1 and 0 <= y <= 1):
                raise LayoutError(f"target ({x}, {y}) lies outside the unit square")
        if self.a_min is None:
            object.__setattr__(self, "a_min", default_a_min(n))
        if self.a_min <= 0:
            raise LayoutError("a_min must be positive")
        if not 0 < self.r_min <= self.r_max:
            raise LayoutError(f"need 0 < r_min <= r_max, got {self.r_min}, {self.r_max}")
        if self.big_m <= 0:
            raise LayoutError("big_m must be positive")
        if self.area_cuts < 2:
            raise LayoutError("area_cuts must be at least 2")

    @property
    def n(self) -> int:
        return len(self.targets)

    @classmethod
    def from_json(cls, data: dict, **overrides) -> "LayoutProblem":
        if not isinstance(data, dict) or "targets" not in data:
            raise LayoutError('layout problem JSON needs a "targets" array')
        kwargs = {k: data[k] for k in ("a_min", "r_min", "r_max", "big_m", "area_cuts") if k in data}
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        try:
            targets = tuple((float(p[0]), float(p[1])) for p in data["targets"])
        except (TypeError, IndexError, ValueError) as exc:
            raise LayoutError("targets must be [x, y] pairs") from exc
        return cls(targets, **kwargs)

    def to_json(self) -> dict:
        return {
            "targets": [list(p) for p in self.targets],
            "a_min": self.a_min,
            "r_min": self.r_min,
            "r_max": self.r_max,
            "big_m": self.big_m,
            "area_cuts": self.area_cuts,
        }


@dataclass(frozen=True)
class LayoutSolution:
    boxes: Tuple[BoundingBox, ...]
    objective: float
    separation: Tuple[Tuple[int, int, str], ...] = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {
            "boxes": [b.to_list() for b in self.boxes],
            "objective": self.objective,
            "separation": [[i, j, d] for i, j, d in self.separation],
        }


def l1_objective(boxes: Sequence[BoundingBox], targets: Sequence[Tuple[float, float]]) -> float:
    total = 0.0
    for box, (px, py) in zip(boxes, targets):
        cx, cy = box.center
        total += abs(cx - px) + abs(cy - py)
    return total


def separated(a: BoundingBox, b: BoundingBox, direction: str, tol: float = 1e-7) -> bool:
    """Whether ``a`` relates to ``b`` by ``direction`` (the Big-M inequalities)."""
    if direction == "left":
        return a.m_offset + a.m_scale <= b.m_offset + tol
    if direction == "right":
        return b.m_offset + b.m_scale <= a.m_offset + tol
    # vertical labels follow the constraint inequalities: "above" is n_i + h_i <= n_j
    if direction == "above":
        return a.n_offset + a.n_scale <= b.n_offset + tol
    if direction == "below":
        return b.n_offset + b.n_scale <= a.n_offset + tol
    raise ValueError(f"unknown direction {direction!r}")


def separation_of(boxes: Sequence[BoundingBox], tol: float = 1e-7) -> Tuple[Tuple[int, int, str], ...]:
    out = []
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            d = next((d for d in DIRECTIONS if separated(boxes[i], boxes[j], d, tol)), None)
            if d is not None:
                out.append((i, j, d))
    return tuple(out)
