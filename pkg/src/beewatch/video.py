"""Media abstraction: video metadata and frame iteration.

The contract every source satisfies: ``meta`` describes the stream,
``frames()`` yields :class:`Frame` objects in index order with ``image``
either an RGB uint8 (H, W, 3) array or ``None`` when the source carries no
pixel data, and a :class:`VideoError` raised mid-iteration marks a decode
truncation. Codec support is an environment concern handled by the OpenCV
source; the synthetic JSON source exists so pipelines are testable without
codecs.

Synthetic descriptor (``*.synth.json``)::

    {"width": 640, "height": 480, "fps": 30, "frame_count": 600,
     "fail_at_frame": null}

``fail_at_frame`` (optional) makes the source raise at that index, for
exercising partial-result handling end to end.
"""

from __future__ import annotations

import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import VideoError

__all__ = ["VideoMeta", "Frame", "FrameSource", "SyntheticVideoSource", "OpenCVVideoSource", "open_video"]

SYNTHETIC_SUFFIX = ".synth.json"


@dataclass(frozen=True)
class VideoMeta:
    """Stream shape: fps, frame count, and duration in seconds."""

    fps: float
    frame_count: int
    duration_s: float = field(default=-1.0)

    def __post_init__(self):
        if self.fps <= 0:
            raise VideoError(f"fps must be positive, got {self.fps}")
        if self.frame_count < 0:
            raise VideoError(f"frame_count must be non-negative, got {self.frame_count}")
        if self.duration_s < 0:
            object.__setattr__(self, "duration_s", self.frame_count / self.fps)
        elif abs(self.duration_s - self.frame_count / self.fps) > 1.0 / self.fps + 1e-9:
            raise VideoError(
                f"duration {self.duration_s}s inconsistent with "
                f"{self.frame_count} frames at {self.fps} fps"
            )


@dataclass
class Frame:
    """One decoded frame; ``image`` is RGB uint8 or None (no pixel data)."""

    index: int
    width: int
    height: int
    image: np.ndarray | None = None


class FrameSource(ABC):
    """Sequential frame producer; single consumer per instance."""

    @property
    @abstractmethod
    def meta(self) -> VideoMeta: ...

    @abstractmethod
    def frames(self) -> Iterator[Frame]: ...

    def close(self) -> None:
        pass

    def __enter__(self) -> "FrameSource":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class SyntheticVideoSource(FrameSource):
    """Pixel-free video defined by a JSON descriptor; frames carry
    ``image=None`` and only dimensions, which is all replay backends need."""

    def __init__(self, width: int, height: int, fps: float, frame_count: int,
                 fail_at_frame: int | None = None):
        if width <= 0 or height <= 0:
            raise VideoError(f"non-positive dimensions {width}x{height}")
        self.width = width
        self.height = height
        self._meta = VideoMeta(fps=fps, frame_count=frame_count)
        self._fail_at_frame = fail_at_frame

    @classmethod
    def from_file(cls, path: str | Path) -> "SyntheticVideoSource":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise VideoError(f"unreadable synthetic descriptor {path}: {exc}") from exc
        try:
            return cls(
                width=int(payload["width"]),
                height=int(payload["height"]),
                fps=float(payload["fps"]),
                frame_count=int(payload["frame_count"]),
                fail_at_frame=payload.get("fail_at_frame"),
            )
        except KeyError as exc:
            raise VideoError(f"synthetic descriptor {path} missing key {exc}") from exc

    @property
    def meta(self) -> VideoMeta:
        return self._meta

    def frames(self) -> Iterator[Frame]:
        for index in range(self._meta.frame_count):
            if self._fail_at_frame is not None and index >= self._fail_at_frame:
                raise VideoError(f"synthetic decode failure at frame {index}")
            yield Frame(index=index, width=self.width, height=self.height)


class OpenCVVideoSource(FrameSource):
    """Real container decoding via OpenCV (optional dependency)."""

    def __init__(self, path: str | Path):
        try:
            import cv2
        except ImportError as exc:
            raise VideoError("opencv-python is required to decode video containers") from exc
        self._cv2 = cv2
        self._path = str(path)
        self._capture = cv2.VideoCapture(self._path)
        if not self._capture.isOpened():
            raise VideoError(f"cannot open video: {path}")
        fps = self._capture.get(cv2.CAP_PROP_FPS)
        frame_count = int(self._capture.get(cv2.CAP_PROP_FRAME_COUNT))
        if fps <= 0 or frame_count <= 0:
            raise VideoError(f"container metadata unavailable for {path}")
        self._meta = VideoMeta(fps=float(fps), frame_count=frame_count)

    @property
    def meta(self) -> VideoMeta:
        return self._meta

    def frames(self) -> Iterator[Frame]:
        for index in range(self._meta.frame_count):
            ok, image = self._capture.read()
            if not ok:
                raise VideoError(f"decode failure at frame {index} of {self._path}")
            rgb = self._cv2.cvtColor(image, self._cv2.COLOR_BGR2RGB)
            yield Frame(index=index, width=rgb.shape[1], height=rgb.shape[0], image=rgb)

    def close(self) -> None:
        self._capture.release()


def open_video(path: str | Path) -> FrameSource:
    """Open a video by path; ``*.synth.json`` descriptors get the synthetic
    source, everything else goes through OpenCV."""
    path = Path(path)
    if not path.is_file():
        raise VideoError(f"no such video: {path}")
    if path.name.endswith(SYNTHETIC_SUFFIX):
        return SyntheticVideoSource.from_file(path)
    return OpenCVVideoSource(path)
