"""Per-class non-maximum suppression.

Hard suppression only: the highest-confidence remaining candidate is kept
and every same-class candidate overlapping it at or above the IoU threshold
is dropped. Confidence ties are broken by input index, which makes the
result deterministic for any fixed input order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import EvaluationError
from .evaluation import Detection
from .geometry import iou

__all__ = ["NmsConfig", "suppress"]


@dataclass(frozen=True)
class NmsConfig:
    """Suppression parameters (model-family defaults)."""

    iou_threshold: float = 0.45
    confidence_floor: float = 0.25
    max_detections: int = 300

    def __post_init__(self):
        if not (0.0 < self.iou_threshold <= 1.0):
            raise EvaluationError(f"iou_threshold out of (0,1]: {self.iou_threshold}")
        if not (0.0 <= self.confidence_floor < 1.0):
            raise EvaluationError(f"confidence_floor out of [0,1): {self.confidence_floor}")
        if self.max_detections < 1:
            raise EvaluationError(f"max_detections must be positive: {self.max_detections}")


def suppress(candidates: Sequence[Detection], cfg: NmsConfig = NmsConfig()) -> list[Detection]:
    """Filter candidates below the confidence floor, then greedily suppress
    same-class overlaps; output sorted by descending confidence and truncated
    to ``max_detections``."""
    order = sorted(
        (i for i, d in enumerate(candidates) if d.confidence >= cfg.confidence_floor),
        key=lambda i: (-candidates[i].confidence, i),
    )
    kept: list[Detection] = []
    suppressed: set[int] = set()
    for idx in order:
        if idx in suppressed:
            continue
        current = candidates[idx]
        kept.append(current)
        if len(kept) >= cfg.max_detections:
            break
        for other in order:
            if other == idx or other in suppressed:
                continue
            rival = candidates[other]
            if rival.class_id == current.class_id and iou(current.box, rival.box) >= cfg.iou_threshold:
                suppressed.add(other)
    return kept
