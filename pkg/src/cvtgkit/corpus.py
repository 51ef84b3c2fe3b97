"""Prompt corpora with quoted visual-text targets."""

from __future__ import annotations

import json
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

SIZES = ("large", "medium", "small")
FONTS = ("regular", "bold", "italic", "cursive")
LANGUAGES = ("EN", "ZH")
MIN_REGIONS, MAX_REGIONS = 2, 5

_QUOTE_MAP = str.maketrans({"‘": "'", "’": "'"})


class CorpusError(ValueError):
    """A corpus file or record that violates the schema."""


@dataclass(frozen=True)
class VisualTextTarget:
    content: str
    carrier: Optional[str] = None
    attributes: Optional[Mapping[str, str]] = None


@dataclass(frozen=True)
class PromptRecord:
    id: str
    prompt: str
    targets: Tuple[VisualTextTarget, ...]
    language: str = "EN"

    @property
    def region_count(self) -> int:
        return len(self.targets)

    @property
    def contents(self) -> List[str]:
        return [t.content for t in self.targets]


@dataclass(frozen=True)
class CorpusStats:
    num_prompts: int
    avg_words: float
    avg_chars: float
    region_histogram: Dict[int, float]
    attributed_fraction: float

    def to_json(self) -> dict:
        return {
            "num_prompts": self.num_prompts,
            "avg_words": self.avg_words,
            "avg_chars": self.avg_chars,
            "region_histogram": {str(k): v for k, v in sorted(self.region_histogram.items())},
            "attributed_fraction": self.attributed_fraction,
        }


def _is_boundary(ch: Optional[str]) -> bool:
    return ch is None or ch.isspace() or unicodedata.category(ch).startswith("P")


def extract_targets(prompt: str) -> List[str]:
    """Contents of single-quoted spans, left to right.

    An opening quote must follow start-of-text, whitespace or punctuation and
    a closing quote must precede end-of-text, whitespace or punctuation, so
    apostrophes inside words ("don't") do not pair up.
    """
    text = prompt.translate(_QUOTE_MAP)
    n = len(text)
    out = []
    i = 0
    while True:
        start = text.find("'", i)
        while start != -1 and not _is_boundary(text[start - 1] if start else None):
            start = text.find("'", start + 1)
        if start == -1:
            return out
        end = text.find("'", start + 1)
        while end != -1 and not _is_boundary(text[end + 1] if end + 1 < n else None):
            end = text.find("'", end + 1)
        if end == -1:
            return out
        out.append(text[start + 1 : end])
        i = end + 1


def _fail(rid, field_name: str, msg: str):
    raise CorpusError(f"record {rid!r}: field {field_name!r}: {msg}")


def _parse_attributes(rid, k: int, raw) -> Optional[Dict[str, str]]:
    if raw is None:
        return None
    where = f"targets[{k}].attributes"
    if not isinstance(raw, dict):
        _fail(rid, where, "must be an object or null")
    extra = set(raw) - {"size", "color", "font"}
    if extra:
        _fail(rid, where, f"unknown keys {sorted(extra)}")
    for key, allowed in (("size", SIZES), ("font", FONTS)):
        if key in raw and raw[key] not in allowed:
            _fail(rid, f"{where}.{key}", f"{raw[key]!r} not in {allowed}")
    if "color" in raw and not isinstance(raw["color"], str):
        _fail(rid, f"{where}.color", "must be a string")
    return dict(raw)


def parse_record(obj) -> PromptRecord:
    if not isinstance(obj, dict):
        raise CorpusError(f"corpus entry must be an object, got {type(obj).__name__}")
    rid = obj.get("id")
    if not isinstance(rid, str) or not rid:
        _fail(rid, "id", "must be a non-empty string")
    prompt = obj.get("prompt")
    if not isinstance(prompt, str):
        _fail(rid, "prompt", "must be a string")
    language = obj.get("language", "EN")
    if language not in LANGUAGES:
        _fail(rid, "language", f"{language!r} not in {LANGUAGES}")
    raw_targets = obj.get("targets")
    if not isinstance(raw_targets, list):
        _fail(rid, "targets", "must be an array")
    targets = []
    for k, t in enumerate(raw_targets):
        if not isinstance(t, dict) or not isinstance(t.get("content"), str):
            _fail(rid, f"targets[{k}].content", "must be a string")
        if not t["content"].strip():
            _fail(rid, f"targets[{k}].content", "is empty")
        carrier = t.get("carrier")
        if carrier is not None and not isinstance(carrier, str):
            _fail(rid, f"targets[{k}].carrier", "must be a string or null")
        attrs = _parse_attributes(rid, k, t.get("attributes"))
        targets.append(VisualTextTarget(t["content"], carrier, attrs))
    if not MIN_REGIONS <= len(targets) <= MAX_REGIONS:
        _fail(rid, "targets", f"region count {len(targets)} outside [{MIN_REGIONS}, {MAX_REGIONS}]")
    quoted = extract_targets(prompt)
    listed = [t.content for t in targets]
    if quoted != listed:
        _fail(rid, "targets", f"listed {listed} but the prompt quotes {quoted}")
    return PromptRecord(rid, prompt, tuple(targets), language)


def load_corpus(path) -> List[PromptRecord]:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, list):
        raise CorpusError(f"{path}: corpus must be a JSON array")
    records = [parse_record(obj) for obj in data]
    seen = Counter(r.id for r in records)
    dupes = sorted(k for k, v in seen.items() if v > 1)
    if dupes:
        raise CorpusError(f"{path}: duplicate record ids {dupes}")
    return records


def record_to_json(record: PromptRecord) -> dict:
    return {
        "id": record.id,
        "prompt": record.prompt,
        "targets": [
            {"content": t.content, "carrier": t.carrier, "attributes": None if t.attributes is None else dict(t.attributes)}
            for t in record.targets
        ],
        "language": record.language,
    }


def corpus_stats(corpus: Sequence[PromptRecord]) -> CorpusStats:
    """Dataset summary; word and character averages use English records only."""
    if not corpus:
        raise CorpusError("cannot summarize an empty corpus")
    english = [r for r in corpus if r.language == "EN"] or list(corpus)
    joined = [" ".join(r.contents) for r in english]
    avg_words = sum(len(j.split()) for j in joined) / len(joined)
    avg_chars = sum(len(j) for j in joined) / len(joined)
    regions = Counter(r.region_count for r in corpus)
    hist = {k: v / len(corpus) for k, v in sorted(regions.items())}
    attributed = sum(any(t.attributes for t in r.targets) for r in corpus)
    return CorpusStats(len(corpus), avg_words, avg_chars, hist, attributed / len(corpus))
