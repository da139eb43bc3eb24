"""Bounding-box geometry: conversions, IoU, GIoU, and pairwise quality matrices.

Boxes use the normalized center format ``(cx, cy, w, h)``.  All arithmetic is
double precision, and every area is derived from the corner form so that
identities such as ``iou(b, b) == 1.0`` hold exactly for positive-area boxes.
Coordinates are deliberately not clamped to the unit frame; only non-finite
values and negative sizes are rejected, because predictions early in training
routinely overflow the image slightly.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import MalformedInputError

__all__ = ["Box", "box_to_corners", "iou", "giou", "quality_matrix"]


@dataclass(frozen=True)
class Box:
    """Axis-aligned box: normalized center ``(cx, cy)`` and size ``(w, h)``.

    Degenerate sizes (``w == 0`` or ``h == 0``) are legal; such a box has zero
    area and zero IoU with everything.
    """

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("cx", "cy", "w", "h"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise MalformedInputError(f"box field {name!r} must be a number, got {value!r}")
            if not math.isfinite(value):
                raise MalformedInputError(f"box field {name!r} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.w < 0.0 or self.h < 0.0:
            raise MalformedInputError(f"box size must be nonnegative, got w={self.w}, h={self.h}")

    @classmethod
    def coerce(cls, value: "Box | Sequence[float]") -> "Box":
        """Accept an existing :class:`Box` or a ``(cx, cy, w, h)`` sequence."""
        if isinstance(value, Box):
            return value
        try:
            cx, cy, w, h = value
        except (TypeError, ValueError) as exc:
            raise MalformedInputError(f"expected a box or 4-sequence, got {value!r}") from exc
        return cls(cx, cy, w, h)

    def corners(self) -> tuple[float, float, float, float]:
        """Corner form ``(x1, y1, x2, y2)``."""
        half_w = self.w / 2.0
        half_h = self.h / 2.0
        return (self.cx - half_w, self.cy - half_h, self.cx + half_w, self.cy + half_h)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.cx, self.cy, self.w, self.h)


def box_to_corners(b: Box) -> tuple[float, float, float, float]:
    """Convert a center-format box to its ``(x1, y1, x2, y2)`` corners."""
    return Box.coerce(b).corners()


def _corner_area(c: tuple[float, float, float, float]) -> float:
    return (c[2] - c[0]) * (c[3] - c[1])


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two boxes, in ``[0, 1]``.

    Returns 0 when the union has zero area (both boxes degenerate).
    """
    ca = Box.coerce(a).corners()
    cb = Box.coerce(b).corners()
    iw = min(ca[2], cb[2]) - max(ca[0], cb[0])
    ih = min(ca[3], cb[3]) - max(ca[1], cb[1])
    inter = iw * ih if (iw > 0.0 and ih > 0.0) else 0.0
    union = _corner_area(ca) + _corner_area(cb) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def giou(a: Box, b: Box) -> float:
    """Generalized IoU of two boxes, in ``[-1, 1]``.

    Subtracts the fraction of the enclosing hull not covered by the union:
    ``iou - (hull - union) / hull``.  Returns 0 when the hull itself has zero
    area (both boxes degenerate to the same point or segment).
    """
    ca = Box.coerce(a).corners()
    cb = Box.coerce(b).corners()
    iw = min(ca[2], cb[2]) - max(ca[0], cb[0])
    ih = min(ca[3], cb[3]) - max(ca[1], cb[1])
    inter = iw * ih if (iw > 0.0 and ih > 0.0) else 0.0
    union = _corner_area(ca) + _corner_area(cb) - inter
    hull_w = max(ca[2], cb[2]) - min(ca[0], cb[0])
    hull_h = max(ca[3], cb[3]) - min(ca[1], cb[1])
    hull = hull_w * hull_h
    if hull <= 0.0:
        return 0.0
    overlap = inter / union if union > 0.0 else 0.0
    # hull >= union mathematically; the clamp only absorbs last-ulp noise so
    # that giou <= iou survives floating point.
    slack = hull - union
    if slack < 0.0:
        slack = 0.0
    return overlap - slack / hull


def quality_matrix(
    pred_boxes: Sequence[Box], target_boxes: Sequence[Box]
) -> np.ndarray:
    """Pairwise IoU matrix, shape ``(len(pred_boxes), len(target_boxes))``.

    Entries are computed with the scalar :func:`iou`, so they agree with it
    bit-for-bit.  Malformed boxes are reported with their offending index.
    """
    preds = _coerce_boxes(pred_boxes, "pred_boxes")
    targets = _coerce_boxes(target_boxes, "target_boxes")
    out = np.zeros((len(preds), len(targets)), dtype=np.float64)
    for i, p in enumerate(preds):
        for j, t in enumerate(targets):
            out[i, j] = iou(p, t)
    return out


def _coerce_boxes(boxes: Sequence[Box], label: str) -> list[Box]:
    coerced = []
    for idx, raw in enumerate(boxes):
        try:
            coerced.append(Box.coerce(raw))
        except MalformedInputError as exc:
            raise MalformedInputError(f"{label}[{idx}]: {exc}") from exc
    return coerced
