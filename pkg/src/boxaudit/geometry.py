"""Axis-aligned bounding-box arithmetic: area, IoU, clustering distance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from boxaudit.errors import InvalidInputError

__all__ = ["BBox", "iou", "box_distance", "iou_matrix"]


@dataclass(frozen=True)
class BBox:
    """Axis-aligned rectangle in pixels, top-left [x, y, w, h] convention.

    Coordinates are real-valued; width and height must be strictly positive.
    """

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        for v in (self.x, self.y, self.w, self.h):
            if not math.isfinite(v):
                raise InvalidInputError(f"box coordinates must be finite, got {self}")
        if self.w <= 0 or self.h <= 0:
            raise InvalidInputError(
                f"degenerate box: width and height must be > 0, got w={self.w}, h={self.h}"
            )

    @property
    def right(self) -> float:
        return self.x + self.w

    @property
    def bottom(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes; 0 when disjoint, 1 when identical.

    Boxes that touch only along an edge or corner have zero intersection area
    and therefore IoU exactly 0.
    """
    ix = min(a.right, b.right) - max(a.x, b.x)
    iy = min(a.bottom, b.bottom) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    # areas from the same corner differences keep iou(a, a) exactly 1
    area_a = (a.right - a.x) * (a.bottom - a.y)
    area_b = (b.right - b.x) * (b.bottom - b.y)
    return inter / (area_a + area_b - inter)


def box_distance(a: BBox, b: BBox) -> float:
    """Clustering distance between two boxes: 1 - IoU."""
    return 1.0 - iou(a, b)


def iou_matrix(boxes: np.ndarray) -> np.ndarray:
    """Pairwise IoU of an (n, 4) array of [x, y, w, h] rows.

    Vectorized companion of :func:`iou` for per-image clustering.
    """
    boxes = np.asarray(boxes, dtype=np.float64)
    if boxes.size == 0:
        return np.zeros((0, 0))
    x1, y1 = boxes[:, 0], boxes[:, 1]
    x2, y2 = x1 + boxes[:, 2], y1 + boxes[:, 3]
    areas = (x2 - x1) * (y2 - y1)
    iw = np.minimum(x2[:, None], x2[None, :]) - np.maximum(x1[:, None], x1[None, :])
    ih = np.minimum(y2[:, None], y2[None, :]) - np.maximum(y1[:, None], y1[None, :])
    inter = np.clip(iw, 0.0, None) * np.clip(ih, 0.0, None)
    return inter / (areas[:, None] + areas[None, :] - inter)
