"""Axis-aligned bounding boxes and overlap metrics.

Coordinates are continuous and carry no unit tag: a box is meaningful in any
shared frame (normalized image coordinates or pixels), and callers must not
mix frames within one computation. There is no integer snapping anywhere in
the metrics; a shared edge contributes zero intersection area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import GeometryError

__all__ = [
    "BoundingBox",
    "NormalizedCenterBox",
    "intersection_area",
    "union_area",
    "enclosing_box",
    "iou",
    "giou",
    "diou",
    "to_corner_form",
    "to_center_form",
]


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned rectangle given by its min/max corners.

    Zero-area boxes are permitted; negative extents are rejected at
    construction.
    """

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        for name in ("x_min", "y_min", "x_max", "y_max"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise GeometryError(f"{name} must be finite, got {value!r}")
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise GeometryError(
                f"negative extent: ({self.x_min}, {self.y_min}, {self.x_max}, {self.y_max})"
            )

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def translate(self, dx: float, dy: float) -> "BoundingBox":
        return BoundingBox(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy)

    def scale(self, factor: float) -> "BoundingBox":
        """Scale about the origin. ``factor`` must be positive."""
        if factor <= 0:
            raise GeometryError(f"scale factor must be positive, got {factor}")
        return BoundingBox(
            self.x_min * factor, self.y_min * factor, self.x_max * factor, self.y_max * factor
        )

    def clamp(self, x_lo: float, y_lo: float, x_hi: float, y_hi: float) -> "BoundingBox":
        """Clip the box to the given bounds."""
        return BoundingBox(
            min(max(self.x_min, x_lo), x_hi),
            min(max(self.y_min, y_lo), y_hi),
            min(max(self.x_max, x_lo), x_hi),
            min(max(self.y_max, y_lo), y_hi),
        )


@dataclass(frozen=True)
class NormalizedCenterBox:
    """Image-relative box in center/size form, all fields in [0, 1].

    This is the coordinate convention of the annotation sidecar files
    (``cx cy w h`` relative to image width and height).
    """

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        if not (0.0 <= self.cx <= 1.0 and 0.0 <= self.cy <= 1.0):
            raise GeometryError(f"center out of [0,1]: ({self.cx}, {self.cy})")
        if not (0.0 < self.w <= 1.0 and 0.0 < self.h <= 1.0):
            raise GeometryError(f"size out of (0,1]: ({self.w}, {self.h})")


def intersection_area(a: BoundingBox, b: BoundingBox) -> float:
    """Area of the overlap rectangle of two boxes; 0 when disjoint."""
    overlap_w = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    overlap_h = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if overlap_w <= 0.0 or overlap_h <= 0.0:
        return 0.0
    return overlap_w * overlap_h


def union_area(a: BoundingBox, b: BoundingBox) -> float:
    return a.area + b.area - intersection_area(a, b)


def enclosing_box(a: BoundingBox, b: BoundingBox) -> BoundingBox:
    """Smallest axis-aligned box containing both inputs."""
    return BoundingBox(
        min(a.x_min, b.x_min),
        min(a.y_min, b.y_min),
        max(a.x_max, b.x_max),
        max(a.y_max, b.y_max),
    )


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union, in [0, 1].

    Two zero-area boxes have IoU 0 by convention, keeping this a total
    function for matching and suppression loops.
    """
    union = union_area(a, b)
    if union <= 0.0:
        return 0.0
    return intersection_area(a, b) / union


def giou(a: BoundingBox, b: BoundingBox) -> float:
    """Generalized IoU: ``iou - (enclosing_area - union) / enclosing_area``.

    Equals plain IoU when the enclosing box is exactly the union; strictly
    smaller otherwise. Range (-1, 1].
    """
    enclosing = enclosing_box(a, b)
    c_area = enclosing.area
    if c_area <= 0.0:
        raise GeometryError("degenerate enclosing box (zero area)")
    union = union_area(a, b)
    return iou(a, b) - (c_area - union) / c_area


def diou(a: BoundingBox, b: BoundingBox) -> float:
    """Distance IoU: ``iou - d^2 / c^2`` with ``d`` the center distance and
    ``c`` the enclosing-box diagonal.

    Equals plain IoU when the centers coincide. Range (-1, 1].
    """
    enclosing = enclosing_box(a, b)
    c_sq = enclosing.width ** 2 + enclosing.height ** 2
    if c_sq <= 0.0:
        raise GeometryError("degenerate enclosing box (zero diagonal)")
    ax, ay = a.center
    bx, by = b.center
    d_sq = (ax - bx) ** 2 + (ay - by) ** 2
    return iou(a, b) - d_sq / c_sq


def to_corner_form(n: NormalizedCenterBox, image_w: float, image_h: float) -> BoundingBox:
    """Convert a normalized center box to pixel-frame corners.

    The result is clamped to the image bounds, so boxes that poke past an
    edge lose the out-of-frame part (and no longer round-trip exactly).
    """
    if image_w <= 0 or image_h <= 0:
        raise GeometryError(f"image dimensions must be positive, got {image_w}x{image_h}")
    half_w = n.w * image_w / 2.0
    half_h = n.h * image_h / 2.0
    cx = n.cx * image_w
    cy = n.cy * image_h
    return BoundingBox(cx - half_w, cy - half_h, cx + half_w, cy + half_h).clamp(
        0.0, 0.0, float(image_w), float(image_h)
    )


def to_center_form(box: BoundingBox, image_w: float, image_h: float) -> NormalizedCenterBox:
    """Convert pixel-frame corners back to the normalized center convention.

    Requires a positive-area box lying inside the image; inverse of
    :func:`to_corner_form` for in-frame boxes.
    """
    if image_w <= 0 or image_h <= 0:
        raise GeometryError(f"image dimensions must be positive, got {image_w}x{image_h}")
    cx, cy = box.center
    return NormalizedCenterBox(
        cx / image_w, cy / image_h, box.width / image_w, box.height / image_h
    )
