"""Keyframe-sampled video detection.

Keyframes are taken at a fixed stride (default 2, i.e. half the native
frame rate), each planned keyframe runs through the detector backend, and
the events collapse into a per-second detection series. Decode failures
mid-stream yield partial results with an explicit truncation marker;
backend failures abort the job.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .backends import DetectorBackend, detect_frame
from .errors import VideoError
from .evaluation import Detection
from .timing import FrameTiming
from .video import Frame, FrameSource, VideoMeta

__all__ = [
    "KeyframePolicy",
    "DetectionEvent",
    "SecondSample",
    "PipelineResult",
    "plan_keyframes",
    "process_video",
    "per_second_series",
]


@dataclass(frozen=True)
class KeyframePolicy:
    """Fixed-stride sampling; stride 2 realizes half-rate keyframing."""

    stride: int = 2
    mode: str = "fixed-stride"

    def __post_init__(self):
        if self.stride < 1:
            raise VideoError(f"stride must be >= 1, got {self.stride}")
        if self.mode != "fixed-stride":
            raise VideoError(f"unknown keyframe mode {self.mode!r}")

    def effective_rate(self, fps: float) -> float:
        """Sampling rate in keyframes per second."""
        return fps / self.stride


@dataclass
class DetectionEvent:
    """Detections for one keyframe, stamped with its video-time second."""

    frame_index: int
    video_time_s: int
    detections: list[Detection]
    timing: FrameTiming


@dataclass(frozen=True)
class SecondSample:
    """Detection count for one second; ``sampled`` is False when no
    keyframe fell in that second (count inherited as 0)."""

    second: int
    count: int
    sampled: bool = True


@dataclass
class PipelineResult:
    events: list[DetectionEvent]
    meta: VideoMeta
    truncated: bool = False
    truncation_reason: str | None = None


def plan_keyframes(meta: VideoMeta, policy: KeyframePolicy = KeyframePolicy()) -> list[int]:
    """Frame indices {0, stride, 2*stride, ...} below the frame count."""
    return list(range(0, meta.frame_count, policy.stride))


def process_video(
    source: FrameSource,
    backend: DetectorBackend,
    policy: KeyframePolicy = KeyframePolicy(),
    progress: Callable[[float], None] | None = None,
    on_event: Callable[[DetectionEvent, Frame], None] | None = None,
) -> PipelineResult:
    """Detect on every planned keyframe, in frame order.

    ``progress`` receives the fraction of the plan completed; ``on_event``
    sees each event with its frame while pixel data is still at hand (for
    gallery writers). A decode failure truncates; everything detected so
    far is returned with the truncation marked.
    """
    meta = source.meta
    plan = plan_keyframes(meta, policy)
    planned = set(plan)
    events: list[DetectionEvent] = []
    result = PipelineResult(events=events, meta=meta)
    if not plan:
        if progress:
            progress(1.0)
        return result

    try:
        for frame in source.frames():
            if frame.index not in planned:
                continue
            detections, timing = detect_frame(backend, frame)
            event = DetectionEvent(
                frame_index=frame.index,
                video_time_s=int(math.floor(frame.index / meta.fps)),
                detections=detections,
                timing=timing,
            )
            events.append(event)
            if on_event:
                on_event(event, frame)
            if progress:
                progress(len(events) / len(plan))
    except VideoError as exc:
        result.truncated = True
        result.truncation_reason = str(exc)
    return result


def per_second_series(events: Sequence[DetectionEvent]) -> list[SecondSample]:
    """One sample per second from 0 through the final event's second.

    A second's count is the maximum detection count over its keyframes, so
    brief entries inside a second are never missed; seconds with no
    keyframe get count 0 and ``sampled=False``.
    """
    if not events:
        return []
    counts: dict[int, int] = {}
    for event in events:
        count = len(event.detections)
        if event.video_time_s not in counts or count > counts[event.video_time_s]:
            counts[event.video_time_s] = count
    last_second = events[-1].video_time_s
    return [
        SecondSample(second=s, count=counts.get(s, 0), sampled=s in counts)
        for s in range(0, last_second + 1)
    ]
