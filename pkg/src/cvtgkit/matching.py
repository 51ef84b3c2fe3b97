"""String normalization, edit distance and per-target fuzzy scores."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from .ocr import OcrOutput


@dataclass(frozen=True)
class InstanceScore:
    target_index: int
    score: float
    # -1 when the target was empty or the stream was shorter than the target
    best_window_offset: int


def _fold(ch: str) -> str:
    low = ch.lower()
    # only single code point mappings (simple folding); multi-char results are skipped
    return low if len(low) == 1 else ch


def normalize(s: str) -> str:
    """Lowercase ``s`` and replace every non-alphanumeric character with a space.

    Runs of spaces collapse to one and the result is trimmed, so
    ``normalize("Buy 2, Get-1 FREE") == "buy 2 get 1 free"``.
    """
    chars = [_fold(ch) if ch.isalnum() else " " for ch in s]
    return " ".join("".join(chars).split())


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Unit-cost edit distance between two sequences (code points for ``str``)."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _window_distances(target: str, stream: str) -> np.ndarray:
    """Edit distance from ``target`` to every length-|target| window of ``stream``.

    All windows are advanced through the DP together; the in-row insertion
    recurrence D[j] = min(E[j], D[j-1] + 1) is solved with a running minimum
    of E[k] - k.
    """
    t = len(target)
    n_win = len(stream) - t + 1
    tgt = np.fromiter(map(ord, target), dtype=np.int64, count=t)
    src = np.fromiter(map(ord, stream), dtype=np.int64, count=len(stream))
    # windows[w, j] = stream[w + j]
    windows = np.lib.stride_tricks.sliding_window_view(src, t)
    cols = np.arange(t + 1, dtype=np.int64)
    # rows index window characters, columns index target characters
    prev = np.broadcast_to(cols, (n_win, t + 1)).copy()
    for i in range(t):
        sub = (windows[:, i : i + 1] != tgt[None, :]).astype(np.int64)
        cand = np.empty_like(prev)
        cand[:, 0] = i + 1
        cand[:, 1:] = np.minimum(prev[:, 1:] + 1, prev[:, :-1] + sub)
        prev = np.minimum.accumulate(cand - cols, axis=1) + cols
    return prev[:, t]


def best_window(target: str, stream: str) -> tuple[float, int]:
    """Return ``(score, offset)`` for the best equal-length window of ``stream``.

    Falls back to whole-stream comparison (offset -1) when the stream is
    shorter than the target.
    """
    if not target:
        raise ValueError("target must be non-empty")
    t = len(target)
    if len(stream) < t:
        score = 1.0 - levenshtein(target, stream) / t
        return min(1.0, max(0.0, score)), -1
    dists = _window_distances(target, stream)
    offset = int(np.argmin(dists))
    score = 1.0 - int(dists[offset]) / t
    return min(1.0, max(0.0, score)), offset


def partial_ratio(target: str, ocr_stream: str) -> float:
    return best_window(target, ocr_stream)[0]


def ocr_stream(ocr: OcrOutput) -> str:
    """Normalized concatenation of all OCR lines, joined with single spaces."""
    return normalize(" ".join(line.text for line in ocr.lines))


def instance_scores(targets: Iterable[str], ocr: OcrOutput) -> List[InstanceScore]:
    targets = list(targets)
    if not targets:
        raise ValueError("at least one target is required")
    stream = ocr_stream(ocr)
    out = []
    for i, raw in enumerate(targets):
        tgt = normalize(raw)
        if not tgt:
            out.append(InstanceScore(i, 0.0, -1))
            continue
        score, offset = best_window(tgt, stream)
        out.append(InstanceScore(i, score, offset))
    return out
