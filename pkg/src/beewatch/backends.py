"""Pluggable detector backends with per-stage timing.

Every backend turns a decoded frame into detections in original-frame pixel
coordinates plus a three-stage timing record. Two backends ship here:

* ``ReplayBackend`` emits (optionally perturbed) ground-truth boxes keyed by
  frame index, for deterministic pipeline verification without weights.
* ``ModelFileBackend`` runs a network exported in the ONNX interchange
  format with a single image input and a single candidate-tensor output;
  exporting such a file from a training stack is an operator step.

``FixedTimingBackend`` is a bench mock that reports exact stage timings.
"""

from __future__ import annotations

import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np

from .dataset import Annotation, letterbox, load_annotation_dir
from .errors import BackendError
from .evaluation import Detection
from .geometry import BoundingBox, to_corner_form
from .nms import NmsConfig, suppress
from .timing import FrameTiming, aggregate_timings

if TYPE_CHECKING:
    from .video import Frame

__all__ = [
    "BackendDescriptor",
    "DetectorBackend",
    "ReplayNoise",
    "ReplayBackend",
    "FixedTimingBackend",
    "ModelFileBackend",
    "detect_frame",
    "aggregate_timings",
    "decode_candidates",
    "load_backend_descriptor",
    "parse_backend_spec",
    "FrameTiming",
]

DEFAULT_INPUT_SIZE = 416


@dataclass(frozen=True)
class BackendDescriptor:
    """What a backend is and how it suppresses candidates."""

    name: str
    model: str  # model file path, or "replay" / "mock"
    input_size: int = DEFAULT_INPUT_SIZE
    nms: NmsConfig = NmsConfig()

    def __post_init__(self):
        if self.input_size <= 0:
            raise BackendError(f"input_size must be positive: {self.input_size}", stage="load")


class DetectorBackend(ABC):
    """Single-consumer detector: one frame at a time per instance."""

    descriptor: BackendDescriptor

    @abstractmethod
    def detect(self, frame: "Frame") -> tuple[list[Detection], FrameTiming]:
        """Detections in original-frame pixel coordinates, plus timings."""


def detect_frame(backend: DetectorBackend, frame: "Frame") -> tuple[list[Detection], FrameTiming]:
    """Run one frame through a backend, attributing unexpected failures."""
    try:
        return backend.detect(frame)
    except BackendError:
        raise
    except Exception as exc:
        raise BackendError(str(exc), stage="inference") from exc


@dataclass(frozen=True)
class ReplayNoise:
    """Perturbation applied to replayed truth boxes.

    ``drop_rate`` removes each box independently; ``jitter_px`` shifts every
    corner coordinate uniformly within +/- the given pixels (clamped to the
    frame); confidences are drawn uniformly from ``confidence_range``.
    """

    drop_rate: float = 0.0
    jitter_px: float = 0.0
    confidence_range: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if not (0.0 <= self.drop_rate <= 1.0):
            raise BackendError(f"drop_rate out of [0,1]: {self.drop_rate}", stage="load")
        if self.jitter_px < 0:
            raise BackendError(f"jitter_px must be non-negative: {self.jitter_px}", stage="load")
        lo, hi = self.confidence_range
        if not (0.0 <= lo <= hi <= 1.0):
            raise BackendError(f"bad confidence_range: {self.confidence_range}", stage="load")


class ReplayBackend(DetectorBackend):
    """Test oracle that replays per-frame truth annotations.

    With zero noise it reproduces the truth exactly at confidence 1.0.
    Noise is seeded per frame index, so results are identical across runs
    and independent of frame visiting order. ``latency_ms`` adds a constant
    sleep to the inference stage for throughput experiments.
    """

    def __init__(
        self,
        truth: Mapping[int, Sequence[Annotation]],
        noise: ReplayNoise = ReplayNoise(),
        seed: int = 0,
        latency_ms: float = 0.0,
        nms: NmsConfig | None = None,
    ):
        self._truth = {int(k): list(v) for k, v in truth.items()}
        self._noise = noise
        self._seed = seed
        self._latency_s = latency_ms / 1000.0
        self.descriptor = BackendDescriptor(name="replay", model="replay", nms=nms or NmsConfig())
        self.invocations = 0

    @classmethod
    def from_annotation_dir(cls, path: str | Path, **kwargs) -> "ReplayBackend":
        """Truth keyed by the integer value of each sidecar's file stem."""
        annotations = load_annotation_dir(path)
        truth: dict[int, list[Annotation]] = {}
        for stem, boxes in annotations.items():
            digits = "".join(ch for ch in stem if ch.isdigit())
            if not digits:
                raise BackendError(f"annotation stem carries no frame index: {stem!r}", stage="load")
            truth[int(digits)] = boxes
        return cls(truth, **kwargs)

    def detect(self, frame: "Frame") -> tuple[list[Detection], FrameTiming]:
        self.invocations += 1
        t0 = time.perf_counter()
        if frame.index not in self._truth:
            raise BackendError(f"no truth entry for frame {frame.index}", stage="inference")
        boxes = [
            to_corner_form(a.box, frame.width, frame.height) for a in self._truth[frame.index]
        ]
        class_ids = [a.class_id for a in self._truth[frame.index]]
        t1 = time.perf_counter()

        if self._latency_s > 0:
            time.sleep(self._latency_s)
        rng = np.random.default_rng((self._seed, frame.index))
        detections: list[Detection] = []
        for box, class_id in zip(boxes, class_ids):
            if self._noise.drop_rate > 0 and rng.random() < self._noise.drop_rate:
                continue
            if self._noise.jitter_px > 0:
                j = rng.uniform(-self._noise.jitter_px, self._noise.jitter_px, size=4)
                jittered = (
                    box.x_min + j[0], box.y_min + j[1], box.x_max + j[2], box.y_max + j[3]
                )
                box = BoundingBox(
                    min(jittered[0], jittered[2]),
                    min(jittered[1], jittered[3]),
                    max(jittered[0], jittered[2]),
                    max(jittered[1], jittered[3]),
                ).clamp(0, 0, frame.width, frame.height)
            lo, hi = self._noise.confidence_range
            confidence = lo if lo == hi else float(rng.uniform(lo, hi))
            detections.append(Detection(box=box, confidence=confidence, class_id=class_id))
        t2 = time.perf_counter()

        detections.sort(key=lambda d: -d.confidence)
        t3 = time.perf_counter()
        timing = FrameTiming.from_stages(
            (t1 - t0) * 1000.0, (t2 - t1) * 1000.0, (t3 - t2) * 1000.0
        )
        return detections, timing


class FixedTimingBackend(DetectorBackend):
    """Mock that reports exact stage timings and no detections.

    ``total_ms`` normally derives from the stages; passing it explicitly
    creates a deliberately non-additive record for fault-injection tests.
    """

    def __init__(
        self,
        pre_process_ms: float,
        inference_ms: float,
        nms_ms: float,
        total_ms: float | None = None,
    ):
        if total_ms is None:
            self._timing = FrameTiming.from_stages(pre_process_ms, inference_ms, nms_ms)
        else:
            self._timing = FrameTiming(pre_process_ms, inference_ms, nms_ms, total_ms)
        self.descriptor = BackendDescriptor(name="mock", model="mock")

    def detect(self, frame: "Frame") -> tuple[list[Detection], FrameTiming]:
        return [], self._timing


def decode_candidates(
    raw: np.ndarray, input_size: int, conf_floor: float
) -> list[Detection]:
    """Decode a YOLO-style candidate tensor into input-space detections.

    Rows are ``(cx, cy, w, h, objectness, class scores...)`` in input-frame
    pixels; confidence is objectness times the best class score. Rows below
    the confidence floor are dropped before suppression.
    """
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[0] == 1:
        arr = arr[0]
    if arr.ndim != 2 or arr.shape[1] < 6:
        raise BackendError(f"candidate tensor must be (N, 5+nc), got {arr.shape}", stage="nms")
    detections: list[Detection] = []
    for row in arr:
        cx, cy, w, h, objectness = row[:5]
        class_scores = row[5:]
        class_id = int(np.argmax(class_scores))
        confidence = float(objectness * class_scores[class_id])
        if confidence < conf_floor:
            continue
        confidence = min(max(confidence, 0.0), 1.0)
        half_w, half_h = w / 2.0, h / 2.0
        box = BoundingBox(cx - half_w, cy - half_h, cx + half_w, cy + half_h).clamp(
            0, 0, input_size, input_size
        )
        detections.append(Detection(box=box, confidence=confidence, class_id=class_id))
    return detections


def load_backend_descriptor(path: str | Path) -> BackendDescriptor:
    """Read the key=value descriptor that rides along a model file.

    Recognized keys: ``name``, ``input_size``, ``class_names`` (comma
    separated, informational), ``iou_threshold``, ``confidence_floor``,
    ``max_detections``.
    """
    entries: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise BackendError(f"{path}:{line_no}: expected key=value", stage="load")
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    try:
        nms = NmsConfig(
            iou_threshold=float(entries.get("iou_threshold", NmsConfig.iou_threshold)),
            confidence_floor=float(entries.get("confidence_floor", NmsConfig.confidence_floor)),
            max_detections=int(entries.get("max_detections", NmsConfig.max_detections)),
        )
        return BackendDescriptor(
            name=entries.get("name", Path(path).stem),
            model=entries.get("model", ""),
            input_size=int(entries.get("input_size", DEFAULT_INPUT_SIZE)),
            nms=nms,
        )
    except ValueError as exc:
        raise BackendError(f"{path}: {exc}", stage="load") from exc


class ModelFileBackend(DetectorBackend):
    """Runs an ONNX-exported network: letterbox pre-process, forward pass,
    then candidate decode + suppression mapped back to source pixels."""

    def __init__(self, model_path: str | Path, descriptor: BackendDescriptor | None = None):
        model_path = Path(model_path)
        if not model_path.is_file():
            raise BackendError(f"model file not found: {model_path}", stage="load")
        self.descriptor = descriptor or BackendDescriptor(
            name=model_path.stem, model=str(model_path)
        )
        try:
            import onnxruntime  # deferred: heavyweight optional dependency
        except ImportError as exc:
            raise BackendError(
                "onnxruntime is required for model-file backends", stage="load"
            ) from exc
        try:
            self._session = onnxruntime.InferenceSession(
                str(model_path), providers=["CPUExecutionProvider"]
            )
        except Exception as exc:
            raise BackendError(f"failed to load {model_path}: {exc}", stage="load") from exc
        self._input_name = self._session.get_inputs()[0].name

    def detect(self, frame: "Frame") -> tuple[list[Detection], FrameTiming]:
        if frame.image is None:
            raise BackendError("model backend needs pixel data", stage="pre-process")
        size = self.descriptor.input_size

        t0 = time.perf_counter()
        transform = letterbox(frame.width, frame.height, target=size)
        canvas = np.full((size, size, 3), transform.pad_value, dtype=np.uint8)
        content = _resize_bilinear(frame.image, transform.content_w, transform.content_h)
        canvas[
            transform.pad_top : transform.pad_top + transform.content_h,
            transform.pad_left : transform.pad_left + transform.content_w,
        ] = content
        tensor = canvas.astype(np.float32).transpose(2, 0, 1)[None] / 255.0
        t1 = time.perf_counter()

        try:
            outputs = self._session.run(None, {self._input_name: tensor})
        except Exception as exc:
            raise BackendError(str(exc), stage="inference") from exc
        t2 = time.perf_counter()

        candidates = decode_candidates(outputs[0], size, self.descriptor.nms.confidence_floor)
        final = suppress(candidates, self.descriptor.nms)
        detections = [
            Detection(
                box=transform.invert_box(d.box).clamp(0, 0, frame.width, frame.height),
                confidence=d.confidence,
                class_id=d.class_id,
            )
            for d in final
        ]
        t3 = time.perf_counter()

        timing = FrameTiming.from_stages(
            (t1 - t0) * 1000.0, (t2 - t1) * 1000.0, (t3 - t2) * 1000.0
        )
        return detections, timing


def _resize_bilinear(image: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resize via PIL (keeps cv2 optional)."""
    from PIL import Image

    return np.asarray(Image.fromarray(image).resize((width, height), Image.BILINEAR))


def parse_backend_spec(spec: str, seed: int = 0) -> DetectorBackend:
    """Build a backend from its single-string spec.

    Forms::

        replay:TRUTH_DIR[,drop=F][,jitter=PX][,seed=N][,latency=MS]
        model:PATH[,desc=DESCRIPTOR_PATH]
        mock:pre=MS,inf=MS,nms=MS[,total=MS]
    """
    kind, _, rest = spec.partition(":")
    if kind == "replay":
        parts = rest.split(",")
        truth_dir = parts[0]
        if not truth_dir:
            raise BackendError("replay spec needs a truth directory", stage="load")
        options = _parse_options(parts[1:], spec)
        noise = ReplayNoise(
            drop_rate=float(options.pop("drop", 0.0)),
            jitter_px=float(options.pop("jitter", 0.0)),
        )
        backend_seed = int(options.pop("seed", seed))
        latency = float(options.pop("latency", 0.0))
        _reject_unknown(options, spec)
        return ReplayBackend.from_annotation_dir(
            truth_dir, noise=noise, seed=backend_seed, latency_ms=latency
        )
    if kind == "model":
        parts = rest.split(",")
        if not parts[0]:
            raise BackendError("model spec needs a file path", stage="load")
        options = _parse_options(parts[1:], spec)
        descriptor = None
        if "desc" in options:
            descriptor = load_backend_descriptor(options.pop("desc"))
            descriptor = BackendDescriptor(
                name=descriptor.name,
                model=parts[0],
                input_size=descriptor.input_size,
                nms=descriptor.nms,
            )
        _reject_unknown(options, spec)
        return ModelFileBackend(parts[0], descriptor=descriptor)
    if kind == "mock":
        options = _parse_options(rest.split(","), spec)
        try:
            total = options.pop("total", None)
            backend = FixedTimingBackend(
                float(options.pop("pre", 0.0)),
                float(options.pop("inf", 0.0)),
                float(options.pop("nms", 0.0)),
                total_ms=None if total is None else float(total),
            )
        except ValueError as exc:
            raise BackendError(f"bad mock spec {spec!r}: {exc}", stage="load") from exc
        _reject_unknown(options, spec)
        return backend
    raise BackendError(f"unknown backend spec {spec!r}", stage="load")


def _parse_options(parts: Sequence[str], spec: str) -> dict[str, str]:
    options: dict[str, str] = {}
    for part in parts:
        if not part:
            continue
        if "=" not in part:
            raise BackendError(f"bad option {part!r} in spec {spec!r}", stage="load")
        key, value = part.split("=", 1)
        options[key] = value
    return options


def _reject_unknown(options: Mapping[str, str], spec: str) -> None:
    if options:
        raise BackendError(f"unknown options {sorted(options)} in spec {spec!r}", stage="load")
