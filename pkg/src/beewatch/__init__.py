"""Pollinator monitoring pipeline toolkit.

Detector evaluation with COCO-style metrics, keyframe-sampled video
detection behind a pluggable backend, and timestamped stakeholder reports.
"""

__version__ = "0.1.0"

from .errors import (
    AnnotationError,
    BackendError,
    BeewatchError,
    DatasetError,
    EvaluationError,
    GeometryError,
    JobError,
    ReportError,
    VideoError,
)
from .geometry import BoundingBox, NormalizedCenterBox, diou, giou, intersection_area, iou
from .evaluation import (
    APCurve,
    Detection,
    EvalSummary,
    GroundTruthBox,
    MatchResult,
    average_precision,
    evaluate_dataset,
    map_at,
    map_range,
    match_detections,
    precision,
    recall,
)
from .nms import NmsConfig, suppress
from .timing import FrameTiming, aggregate_timings

__all__ = [
    "__version__",
    "BeewatchError",
    "GeometryError",
    "AnnotationError",
    "DatasetError",
    "EvaluationError",
    "BackendError",
    "VideoError",
    "ReportError",
    "JobError",
    "BoundingBox",
    "NormalizedCenterBox",
    "intersection_area",
    "iou",
    "giou",
    "diou",
    "Detection",
    "GroundTruthBox",
    "MatchResult",
    "APCurve",
    "EvalSummary",
    "match_detections",
    "precision",
    "recall",
    "average_precision",
    "map_at",
    "map_range",
    "evaluate_dataset",
    "NmsConfig",
    "suppress",
    "FrameTiming",
    "aggregate_timings",
]
