"""Quotation-guided attention gate.

An anchor token's attention maps are averaged, box-smoothed, reduced to
the neighbourhood of their strongest peak with a Gaussian proximity mask,
and soft-binarized between two quantiles.  The resulting gate multiplies
text-token attention by ``1 + G``.

Maps are ``(height, width)`` float arrays, row-major; cell ``(y, x)``
sits at row ``y``, column ``x``.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Tuple

import numpy as np

ATNM_MAGIC = b"ATNM"
ATNM_VERSION = 1


class AttentionError(ValueError):
    """Raised when an attention map carries no usable signal."""


@dataclass(frozen=True, eq=False)
class AttentionMap:
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"attention map must be a non-empty 2-D grid, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("attention map contains non-finite values")
        if np.any(arr < 0):
            raise ValueError("attention map values must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def __eq__(self, other):
        if not isinstance(other, AttentionMap):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class GateConfig:
    kernel: int = 5
    q_low: float = 0.80
    q_high: float = 0.99
    sigma_floor: float = 1.0
    flat_epsilon: float = 1e-9

    def __post_init__(self):
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ValueError(f"kernel must be odd and positive, got {self.kernel}")
        if not 0.0 < self.q_low < self.q_high <= 1.0:
            raise ValueError(f"need 0 < q_low < q_high <= 1, got {self.q_low}, {self.q_high}")
        if self.sigma_floor <= 0:
            raise ValueError("sigma_floor must be positive")


@dataclass(frozen=True, eq=False)
class Gate:
    values: np.ndarray
    peak: Tuple[int, int]  # (x, y)
    sigma: Tuple[float, float]  # (sigma_x, sigma_y) in pixels
    stages: dict = field(default_factory=dict, repr=False)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def as_map(self) -> AttentionMap:
        return AttentionMap(self.values)


def _as_array(m) -> np.ndarray:
    return m.values if isinstance(m, (AttentionMap, Gate)) else np.asarray(m, dtype=np.float64)


def average_maps(maps: Sequence[AttentionMap]) -> AttentionMap:
    maps = list(maps)
    if not maps:
        raise ValueError("need at least one attention map")
    shape = maps[0].shape
    for k, m in enumerate(maps):
        if m.shape != shape:
            raise ValueError(f"map {k} has shape {m.shape}, expected {shape}")
    total = np.zeros(shape)
    for m in maps:
        total += m.values
    return AttentionMap(total / len(maps))


def _box_sum(arr: np.ndarray, r: int) -> np.ndarray:
    """Sum of each (2r+1)-square neighbourhood, clipped to the grid."""
    k = 2 * r + 1
    padded = np.pad(arr, r)
    rows = np.lib.stride_tricks.sliding_window_view(padded, k, axis=1).sum(axis=-1)
    return np.lib.stride_tricks.sliding_window_view(rows, k, axis=0).sum(axis=-1)


def smooth(amap: AttentionMap, kernel: int = 5) -> AttentionMap:
    """Average pooling with stride 1; border windows shrink to in-bounds cells."""
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"kernel must be odd and positive, got {kernel}")
    if kernel > 2 * min(amap.shape) - 1:
        raise ValueError(f"kernel {kernel} too large for a {amap.height}x{amap.width} map")
    if kernel == 1:
        return amap
    r = kernel // 2
    sums = _box_sum(amap.values, r)
    counts = _box_sum(np.ones(amap.shape), r)
    return AttentionMap(sums / counts)


def argmax_peak(arr: np.ndarray) -> Tuple[int, int]:
    """Row-major first maximum, returned as ``(x, y)``."""
    y, x = np.unravel_index(int(np.argmax(arr)), arr.shape)
    return int(x), int(y)


def moment_sigma(arr: np.ndarray, peak: Tuple[int, int]) -> Tuple[float, float]:
    """Attention-weighted RMS distance from the peak along each axis."""
    h, w = arr.shape
    mass = arr.sum()
    px, py = peak
    dx2 = (np.arange(w) - px) ** 2.0
    dy2 = (np.arange(h) - py) ** 2.0
    var_x = float((arr.sum(axis=0) * dx2).sum() / mass)
    var_y = float((arr.sum(axis=1) * dy2).sum() / mass)
    return math.sqrt(var_x), math.sqrt(var_y)


def primary_peak_retention(amap: AttentionMap, sigma_floor: float = 1.0):
    """Suppress everything away from the strongest peak.

    Returns ``(masked_map, peak, sigma)`` with ``peak = (x, y)`` and
    ``sigma = (sigma_x, sigma_y)`` after flooring.
    """
    arr = amap.values
    if not np.any(arr > 0):
        raise AttentionError("absent anchor attention: map is all zero")
    peak = argmax_peak(arr)
    raw_x, raw_y = moment_sigma(arr, peak)
    sx, sy = max(raw_x, sigma_floor), max(raw_y, sigma_floor)
    px, py = peak
    gx = np.exp(-((np.arange(amap.width) - px) ** 2.0) / (2 * sx * sx))
    gy = np.exp(-((np.arange(amap.height) - py) ** 2.0) / (2 * sy * sy))
    out = arr * np.outer(gy, gx)
    return AttentionMap(out), peak, (sx, sy)


def nearest_rank_quantile(values: np.ndarray, q: float) -> float:
    """The ceil(q*N)-th smallest value (1-based rank, at least 1)."""
    flat = np.sort(np.asarray(values, dtype=np.float64).ravel())
    # round before ceil so q*N = 7.000000000000001 (0.07 * 100) still means rank 7
    rank = max(1, math.ceil(round(q * flat.size, 9)))
    return float(flat[min(rank, flat.size) - 1])


def smoothstep(z):
    z = np.clip(z, 0.0, 1.0)
    return z * z * (3.0 - 2.0 * z)


def soft_binarize(amap: AttentionMap, q_low: float = 0.80, q_high: float = 0.99, flat_epsilon: float = 1e-9) -> np.ndarray:
    arr = amap.values
    top = arr.max()
    if top <= 0:
        raise AttentionError("absent anchor attention: map is all zero")
    norm = arr / top
    v_low = nearest_rank_quantile(norm, q_low)
    v_high = nearest_rank_quantile(norm, q_high)
    if v_high - v_low < flat_epsilon:
        return (norm >= v_high).astype(np.float64)
    return smoothstep((norm - v_low) / (v_high - v_low))


def build_gate(anchor_maps: Sequence[AttentionMap], config: GateConfig = GateConfig(), keep_stages: bool = False) -> Gate:
    averaged = average_maps(anchor_maps)
    if not np.any(averaged.values > 0):
        raise AttentionError("absent anchor attention: all anchor maps are zero")
    smoothed = smooth(averaged, config.kernel)
    retained, peak, sigma = primary_peak_retention(smoothed, config.sigma_floor)
    values = soft_binarize(retained, config.q_low, config.q_high, config.flat_epsilon)
    values.setflags(write=False)
    stages = {}
    if keep_stages:
        stages = {"averaged": averaged, "smoothed": smoothed, "retained": retained}
    return Gate(values, peak, sigma, stages)


def modulate(attention: AttentionMap, gate) -> AttentionMap:
    """Boost attention inside the gate: ``A * (1 + G)``; no renormalization."""
    g = _as_array(gate)
    if g.shape != attention.shape:
        raise ValueError(f"gate shape {g.shape} does not match attention shape {attention.shape}")
    return AttentionMap(attention.values * (1.0 + g))


def synthesize_map(
    blobs: Iterable[dict],
    noise_amplitude: float = 0.0,
    dims: Tuple[int, int] = (32, 32),
    seed: int = 0,
) -> AttentionMap:
    """Sum of isotropic Gaussian bumps plus uniform noise in ``[0, noise_amplitude]``.

    Each blob is ``{"center": (x, y), "sigma": s, "amplitude": a}``.
    """
    h, w = dims
    if h < 1 or w < 1:
        raise ValueError("dims must be positive")
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    out = np.zeros((h, w))
    for blob in blobs:
        cx, cy = blob["center"]
        s = float(blob["sigma"])
        amp = float(blob["amplitude"])
        if amp < 0:
            raise ValueError("blob amplitude must be non-negative")
        out += amp * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * s * s))
    if noise_amplitude > 0:
        rng = np.random.default_rng(seed)
        out += rng.uniform(0.0, noise_amplitude, size=(h, w))
    return AttentionMap(out)


# -- file formats -----------------------------------------------------------

def encode_atnm(amap) -> bytes:
    arr = _as_array(amap)
    h, w = arr.shape
    header = ATNM_MAGIC + bytes([ATNM_VERSION]) + struct.pack("<II", h, w)
    return header + np.ascontiguousarray(arr, dtype="<f4").tobytes()


def decode_atnm(data: bytes) -> AttentionMap:
    if len(data) < 13 or data[:4] != ATNM_MAGIC:
        raise ValueError("not an ATNM attention map (bad magic)")
    if data[4] != ATNM_VERSION:
        raise ValueError(f"unsupported ATNM version {data[4]}")
    h, w = struct.unpack("<II", data[5:13])
    expected = 13 + 4 * h * w
    if len(data) != expected:
        raise ValueError(f"ATNM payload has {len(data)} bytes, expected {expected}")
    arr = np.frombuffer(data, dtype="<f4", offset=13).reshape(h, w)
    return AttentionMap(arr.astype(np.float64))


def map_from_json(data: dict) -> AttentionMap:
    try:
        h, w, vals = int(data["height"]), int(data["width"]), data["values"]
    except (KeyError, TypeError) as exc:
        raise ValueError('attention JSON needs "height", "width" and "values"') from exc
    arr = np.asarray(vals, dtype=np.float64)
    if arr.size != h * w:
        raise ValueError(f"attention JSON has {arr.size} values, expected {h}x{w}")
    return AttentionMap(arr.reshape(h, w))


def map_to_json(amap) -> dict:
    arr = _as_array(amap)
    return {"height": arr.shape[0], "width": arr.shape[1], "values": [float(v) for v in arr.ravel()]}


def load_map(path) -> AttentionMap:
    """Read an attention map from ATNM bytes or the JSON alternative."""
    data = Path(path).read_bytes()
    if data[:4] == ATNM_MAGIC:
        return decode_atnm(data)
    return map_from_json(json.loads(data.decode("utf-8")))


def save_map(amap, path) -> None:
    Path(path).write_bytes(encode_atnm(amap))
