"""Evaluation metrics for rendered visual text and text-token attention.

Rate metrics come with their raw counts so subsets can be pooled
(micro-averaged) rather than averaged rate-by-rate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .gate import AttentionError, AttentionMap, average_maps
from .layout.masks import box_mask
from .layout.model import BoundingBox
from .matching import levenshtein, normalize, ocr_stream, partial_ratio
from .ocr import OcrOutput

NED_EPS = 1e-5
ETA_XI = 1e-6
CLIP_SCALE = 2.5


@dataclass(frozen=True)
class GtAnnotation:
    phrase: str
    bbox: BoundingBox

    def __post_init__(self):
        if not self.phrase.strip():
            raise ValueError("annotation phrase must be non-empty")

    @classmethod
    def from_json(cls, data: dict) -> "GtAnnotation":
        return cls(str(data["phrase"]), BoundingBox.from_list(data["bbox"]))


def load_annotations(path) -> List[GtAnnotation]:
    with open(Path(path), encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ValueError("annotation file must hold a JSON array")
    return [GtAnnotation.from_json(d) for d in data]


@dataclass(frozen=True)
class Counts:
    words: int = 0
    words_correct: int = 0
    ned_sum: float = 0.0
    images: int = 0
    spans: int = 0
    spans_matched: int = 0
    targets: int = 0
    targets_recalled: int = 0

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(
            self.words + other.words,
            self.words_correct + other.words_correct,
            self.ned_sum + other.ned_sum,
            self.images + other.images,
            self.spans + other.spans,
            self.spans_matched + other.spans_matched,
            self.targets + other.targets,
            self.targets_recalled + other.targets_recalled,
        )


@dataclass(frozen=True)
class MetricsReport:
    word_accuracy: Optional[float]
    ned: Optional[float]
    span_accuracy: Optional[float] = None
    recall: Optional[float] = None
    eta: Optional[Tuple[float, ...]] = None
    acr: Optional[Tuple[float, ...]] = None
    clipscore: Optional[float] = None
    counts: Counts = field(default_factory=Counts)

    @classmethod
    def from_counts(cls, counts: Counts, eta=None, acr=None, clipscore=None) -> "MetricsReport":
        def rate(num, den):
            return num / den if den else None

        return cls(
            word_accuracy=rate(counts.words_correct, counts.words),
            ned=rate(counts.ned_sum, counts.words),
            span_accuracy=rate(counts.spans_matched, counts.spans),
            recall=rate(counts.targets_recalled, counts.targets),
            eta=None if eta is None else tuple(eta),
            acr=None if acr is None else tuple(acr),
            clipscore=clipscore,
            counts=counts,
        )

    def to_json(self) -> dict:
        c = self.counts
        return {
            "word_accuracy": self.word_accuracy,
            "ned": self.ned,
            "span_accuracy": self.span_accuracy,
            "recall": self.recall,
            "eta": None if self.eta is None else list(self.eta),
            "eta_mean": None if not self.eta else float(np.mean(self.eta)),
            "acr": None if self.acr is None else list(self.acr),
            "clipscore": self.clipscore,
            "counts": {
                "words": c.words,
                "words_correct": c.words_correct,
                "ned_sum": c.ned_sum,
                "images": c.images,
                "spans": c.spans,
                "spans_matched": c.spans_matched,
                "targets": c.targets,
                "targets_recalled": c.targets_recalled,
            },
        }


# -- text accuracy ----------------------------------------------------------

def target_words(targets: Iterable[str]) -> List[str]:
    return [w for t in targets for w in t.lower().split()]


def ocr_words(ocr: OcrOutput) -> List[str]:
    return [w for line in ocr.lines for w in line.text.lower().split()]


def word_accuracy(targets: Sequence[str], ocr: OcrOutput) -> Tuple[int, int]:
    """``(correct, total)``: a target word is correct if it occurs among the OCR words."""
    vocab = set(ocr_words(ocr))
    words = target_words(targets)
    return sum(w in vocab for w in words), len(words)


def ned_similarity(gt: str, pred: str, eps: float = NED_EPS) -> float:
    return 1.0 - levenshtein(gt, pred) / (max(len(gt), len(pred)) + eps)


def closest_word(word: str, candidates: Sequence[str]) -> str:
    """Candidate with the highest ``1 - dist/maxlen``; earliest wins ties, ``""`` if none."""
    best, best_sim = "", -1.0
    for cand in candidates:
        longest = max(len(word), len(cand))
        sim = 1.0 - levenshtein(word, cand) / longest if longest else 1.0
        if sim > best_sim:
            best, best_sim = cand, sim
    return best


def ned(targets: Sequence[str], ocr: OcrOutput, eps: float = NED_EPS) -> Tuple[float, int]:
    """``(sum of per-word similarities, word count)``."""
    pool = ocr_words(ocr)
    words = target_words(targets)
    total = sum(ned_similarity(w, closest_word(w, pool), eps) for w in words)
    return total, len(words)


def _span_key(text: str) -> str:
    return normalize(text).replace(" ", "")


def span_accuracy(spans: Sequence[str], ocr: OcrOutput) -> Tuple[int, int]:
    """A span matches when it equals some run of consecutive OCR lines, concatenated.

    Comparison ignores spaces, so an English span broken across two lines
    still matches its concatenation.
    """
    lines = [_span_key(ln.text) for ln in ocr.lines]
    runs = set()
    for i in range(len(lines)):
        joined = ""
        for j in range(i, len(lines)):
            joined += lines[j]
            runs.add(joined)
    matched = 0
    for span in spans:
        key = _span_key(span)
        matched += bool(key) and key in runs
    return matched, len(spans)


def recall_counts(targets: Sequence[str], ocr: OcrOutput, threshold: float = 0.8) -> Tuple[int, int]:
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    stream = ocr_stream(ocr)
    hits = 0
    for t in targets:
        key = normalize(t)
        if key and partial_ratio(key, stream) >= threshold:
            hits += 1
    return hits, len(targets)


def recall(targets: Sequence[str], ocr: OcrOutput, threshold: float = 0.8) -> float:
    hits, total = recall_counts(targets, ocr, threshold)
    return hits / total


# -- attention metrics ------------------------------------------------------

def denoise(values: np.ndarray) -> np.ndarray:
    """Keep values strictly above mean + one population standard deviation."""
    if values.max() == values.min():
        # nothing exceeds mu + sigma = mu; skip the rounding-prone comparison
        return np.zeros_like(values)
    cut = values.mean() + values.std()
    return np.where(values > cut, values, 0.0)


def effective_attention_efficiency(amap: AttentionMap, gt_box: BoundingBox, xi: float = ETA_XI) -> float:
    kept = denoise(amap.values)
    inside = box_mask(gt_box, amap.height, amap.width).astype(bool)
    return float(kept[inside].sum() / (kept[~inside].sum() + xi))


def acr(token_maps: Sequence[AttentionMap], bbox_mask) -> float:
    """Mean attention inside the mask over the mean attention of the whole map."""
    avg = average_maps(token_maps).values
    mask = (bbox_mask.values if isinstance(bbox_mask, AttentionMap) else np.asarray(bbox_mask)) > 0
    if mask.shape != avg.shape:
        raise ValueError(f"mask shape {mask.shape} does not match map shape {avg.shape}")
    if not mask.any():
        raise ValueError("mask selects no cells")
    if not np.any(avg > 0):
        raise AttentionError("vacuous attention: averaged map is all zero")
    if mask.all() or avg.max() == avg.min():
        # full coverage or a flat map: both means coincide
        return 1.0
    return float(avg[mask].mean() / avg.mean())


def clipscore_aggregate(cosines: Sequence[float]) -> float:
    if len(cosines) == 0:
        raise ValueError("need at least one cosine similarity")
    return float(sum(CLIP_SCALE * max(0.0, c) for c in cosines) / len(cosines))


# -- aggregation ------------------------------------------------------------

def evaluate_record(
    targets: Sequence[str],
    ocr: OcrOutput,
    recall_threshold: float = 0.8,
) -> Counts:
    correct, total = word_accuracy(targets, ocr)
    ned_sum, _ = ned(targets, ocr)
    matched, spans = span_accuracy(targets, ocr)
    hits, n_targets = recall_counts(targets, ocr, recall_threshold)
    return Counts(total, correct, ned_sum, 1, spans, matched, n_targets, hits)


def aggregate_overall(reports: Sequence[MetricsReport]) -> MetricsReport:
    """Pool subsets: word metrics by word count, image metrics by image count."""
    reports = list(reports)
    counts = Counts()
    for r in reports:
        counts = counts + r.counts
    if counts.words == 0:
        raise ValueError("no words to aggregate")
    clip_num = sum(r.clipscore * r.counts.images for r in reports if r.clipscore is not None)
    clip_den = sum(r.counts.images for r in reports if r.clipscore is not None)
    eta = [v for r in reports if r.eta for v in r.eta]
    acr_vals = [v for r in reports if r.acr for v in r.acr]
    has_eta = any(r.eta is not None for r in reports)
    has_acr = any(r.acr is not None for r in reports)
    return MetricsReport.from_counts(
        counts,
        eta=eta if has_eta else None,
        acr=acr_vals if has_acr else None,
        clipscore=clip_num / clip_den if clip_den else None,
    )


def macro_average(reports: Sequence[MetricsReport]) -> Dict[str, Optional[float]]:
    """Unweighted mean of per-subset rates; reported for contrast only."""
    out = {}
    for key in ("word_accuracy", "ned", "span_accuracy", "recall", "clipscore"):
        vals = [getattr(r, key) for r in reports if getattr(r, key) is not None]
        out[key] = sum(vals) / len(vals) if vals else None
    return out
