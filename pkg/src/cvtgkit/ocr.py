"""OCR transcripts as ingested data."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

from .layout.model import BoundingBox


@dataclass(frozen=True)
class OcrLine:
    text: str
    bbox: Optional[BoundingBox] = None


@dataclass(frozen=True)
class OcrOutput:
    """Ordered OCR lines, in the order the upstream engine emitted them."""

    lines: Tuple[OcrLine, ...] = field(default_factory=tuple)

    @classmethod
    def from_texts(cls, *texts: str) -> "OcrOutput":
        return cls(tuple(OcrLine(t) for t in texts))

    @classmethod
    def from_json(cls, data: dict) -> "OcrOutput":
        if not isinstance(data, dict) or not isinstance(data.get("lines"), list):
            raise ValueError('OCR JSON must be an object with a "lines" array')
        lines = []
        for k, item in enumerate(data["lines"]):
            if not isinstance(item, dict) or not isinstance(item.get("text"), str):
                raise ValueError(f"OCR line {k}: expected an object with a string 'text'")
            bbox = item.get("bbox")
            lines.append(OcrLine(item["text"], None if bbox is None else BoundingBox.from_list(bbox)))
        return cls(tuple(lines))

    def to_json(self) -> dict:
        return {
            "lines": [
                {"text": ln.text, "bbox": None if ln.bbox is None else ln.bbox.to_list()}
                for ln in self.lines
            ]
        }

    @property
    def texts(self) -> Tuple[str, ...]:
        return tuple(ln.text for ln in self.lines)


def load_ocr(path) -> OcrOutput:
    with open(Path(path), encoding="utf-8") as fh:
        return OcrOutput.from_json(json.load(fh))
