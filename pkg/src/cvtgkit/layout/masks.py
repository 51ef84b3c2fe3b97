from __future__ import annotations

from typing import List, Sequence

import numpy as np

from ..gate import AttentionMap
from .model import BoundingBox


def box_mask(box: BoundingBox, height: int, width: int) -> np.ndarray:
    """Cells whose centre lies in the box; left and bottom edges inclusive.

    Row ``y`` spans ``[y/height, (y+1)/height)`` of the vertical axis, so row 0
    is the bottom edge of the box coordinate frame.
    """
    if height < 1 or width < 1:
        raise ValueError("mask dimensions must be positive")
    cx = (np.arange(width) + 0.5) / width
    cy = (np.arange(height) + 0.5) / height
    in_x = (cx >= box.m_offset) & (cx < box.m_offset + box.m_scale)
    in_y = (cy >= box.n_offset) & (cy < box.n_offset + box.n_scale)
    return np.outer(in_y, in_x).astype(np.float64)


def boxes_to_masks(boxes: Sequence[BoundingBox], height: int, width: int) -> List[AttentionMap]:
    return [AttentionMap(box_mask(b, height, width)) for b in boxes]
