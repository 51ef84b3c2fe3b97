"""Slow, obviously-correct reference implementations used by the tests.

None of these share code with the package under test.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def lev_table(a: str, b: str) -> int:
    """Edit distance from the full (len(a)+1) x (len(b)+1) DP table."""
    D = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        D[i][0] = i
    for j in range(len(b) + 1):
        D[0][j] = j
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            D[i][j] = min(
                D[i - 1][j] + 1,
                D[i][j - 1] + 1,
                D[i - 1][j - 1] + (a[i - 1] != b[j - 1]),
            )
    return D[len(a)][len(b)]


def partial_ratio_brute(target: str, stream: str) -> float:
    """Best similarity over every equal-length window, enumerated one by one."""
    t = len(target)
    if len(stream) < t:
        return max(0.0, 1.0 - lev_table(target, stream) / t)
    best = min(lev_table(target, stream[k : k + t]) for k in range(len(stream) - t + 1))
    return 1.0 - best / t


def base_reward_exact(scores, lam) -> Fraction:
    s = [Fraction(x) for x in scores]
    mean = sum(s) / len(s)
    return (1 - Fraction(lam)) * mean + Fraction(lam) * min(s)


def nearest_rank(values, q) -> float:
    """ceil(q*N)-th smallest value, with q*N computed exactly in rationals."""
    flat = sorted(float(v) for v in np.asarray(values).ravel())
    rank = max(1, math.ceil(Fraction(str(q)) * len(flat)))
    return flat[rank - 1]


def smoothstep_poly(z: float) -> float:
    z = min(1.0, max(0.0, z))
    return 3 * z**2 - 2 * z**3


def box_smooth_loops(arr: np.ndarray, kernel: int) -> np.ndarray:
    """Mean over the in-bounds part of each kernel-square, cell by cell."""
    h, w = arr.shape
    r = kernel // 2
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            vals = [
                arr[yy, xx]
                for yy in range(max(0, y - r), min(h, y + r + 1))
                for xx in range(max(0, x - r), min(w, x + r + 1))
            ]
            out[y, x] = sum(vals) / len(vals)
    return out


def moment_sigma_loops(arr: np.ndarray, px: int, py: int):
    h, w = arr.shape
    mass = vx = vy = 0.0
    for y in range(h):
        for x in range(w):
            a = arr[y, x]
            mass += a
            vx += a * (x - px) ** 2
            vy += a * (y - py) ** 2
    return math.sqrt(vx / mass), math.sqrt(vy / mass)


def boxes_overlap(a, b, tol=1e-7) -> bool:
    """Open-interior intersection of two (x, y, w, h) boxes."""
    return (
        a[0] + a[2] > b[0] + tol
        and b[0] + b[2] > a[0] + tol
        and a[1] + a[3] > b[1] + tol
        and b[1] + b[3] > a[1] + tol
    )
