"""Per-frame stage timing records.

Stage boundaries are a contract of this artifact: pre-process covers decode
to network input (including letterboxing), inference covers the forward
pass, and NMS covers candidate decoding plus suppression. The total is the
sum of the three stages.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import BackendError

ADDITIVITY_TOLERANCE_MS = 0.1

__all__ = ["FrameTiming", "aggregate_timings", "ADDITIVITY_TOLERANCE_MS"]


@dataclass(frozen=True)
class FrameTiming:
    """Wall-clock milliseconds per stage, from a monotonic source."""

    pre_process_ms: float
    inference_ms: float
    nms_ms: float
    total_ms: float

    def __post_init__(self):
        for name in ("pre_process_ms", "inference_ms", "nms_ms", "total_ms"):
            if getattr(self, name) < 0:
                raise BackendError(f"{name} must be non-negative", stage="timing")

    @classmethod
    def from_stages(cls, pre_process_ms: float, inference_ms: float, nms_ms: float) -> "FrameTiming":
        return cls(pre_process_ms, inference_ms, nms_ms, pre_process_ms + inference_ms + nms_ms)

    def is_additive(self, tolerance_ms: float = ADDITIVITY_TOLERANCE_MS) -> bool:
        """Whether the total matches the stage sum within tolerance."""
        return abs(self.total_ms - (self.pre_process_ms + self.inference_ms + self.nms_ms)) <= tolerance_ms


def aggregate_timings(timings: Iterable[FrameTiming]) -> FrameTiming:
    """Componentwise arithmetic mean of per-frame timings."""
    items = list(timings)
    if not items:
        raise BackendError("cannot aggregate an empty timing list", stage="timing")
    n = len(items)
    return FrameTiming(
        sum(t.pre_process_ms for t in items) / n,
        sum(t.inference_ms for t in items) / n,
        sum(t.nms_ms for t in items) / n,
        sum(t.total_ms for t in items) / n,
    )
