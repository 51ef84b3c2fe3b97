"""Bottleneck-aware OCR reward.

Per-target fuzzy scores are mixed as a convex combination of their mean and
their minimum, then decayed when the OCR output is much longer than the
targets it is supposed to contain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

from .matching import instance_scores, normalize, ocr_stream
from .ocr import OcrOutput


@dataclass(frozen=True)
class RewardConfig:
    lambda_bal: float = 0.3
    delta: float = 1.5

    def __post_init__(self):
        if not 0.0 <= self.lambda_bal <= 1.0:
            raise ValueError(f"lambda_bal must lie in [0, 1], got {self.lambda_bal}")
        if self.delta < 1.0:
            raise ValueError(f"delta must be >= 1, got {self.delta}")


@dataclass(frozen=True)
class RewardReport:
    scores: Tuple[float, ...]
    r_base: float
    l_pred: int
    l_target: int
    lambda_noise: float
    r_ocr: float
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "scores": list(self.scores),
            "r_base": self.r_base,
            "l_pred": self.l_pred,
            "l_target": self.l_target,
            "lambda_noise": self.lambda_noise,
            "r_ocr": self.r_ocr,
            "degenerate": self.degenerate,
        }


def base_reward(scores: Sequence[float], lambda_bal: float) -> float:
    if len(scores) == 0:
        raise ValueError("scores must be non-empty")
    lo = min(scores)
    # float summation can push the mean of equal scores an ulp outside [min, max]
    mean = min(max(scores), max(lo, math.fsum(scores) / len(scores)))
    if lambda_bal == 1.0:
        return lo
    value = mean - lambda_bal * (mean - lo)
    # guard the exact-arithmetic bounds against last-ulp rounding
    return min(mean, max(lo, value))


def noise_penalty(l_pred: int, l_target: int, delta: float) -> float:
    """Length decay: 1 while l_pred/l_target <= delta, 1/(ratio - delta + 1) beyond."""
    if l_target <= 0:
        raise ValueError("l_target must be positive")
    ratio = l_pred / l_target
    if ratio <= delta:
        return 1.0
    return 1.0 / (ratio - delta + 1.0)


def _char_len(text: str) -> int:
    return len(text.replace(" ", ""))


def ocr_reward(targets: Sequence[str], ocr: OcrOutput, config: RewardConfig = RewardConfig()) -> RewardReport:
    if len(targets) == 0:
        raise ValueError("at least one target is required")
    scores = tuple(s.score for s in instance_scores(targets, ocr))
    l_target = sum(_char_len(normalize(t)) for t in targets)
    l_pred = _char_len(ocr_stream(ocr))
    if l_target == 0:
        return RewardReport(scores, 0.0, l_pred, 0, 1.0, 0.0, degenerate=True)
    r_base = base_reward(scores, config.lambda_bal)
    lam = noise_penalty(l_pred, l_target, config.delta)
    return RewardReport(scores, r_base, l_pred, l_target, lam, lam * r_base)
