"""Detection-to-truth matching, precision/recall, and mAP.

Matching is greedy in descending confidence order: each detection takes the
unmatched ground-truth box with the highest IoU at or above the threshold,
ties broken by the lower ground-truth index. AP integrates the precision
envelope with 101-point interpolation (samples at recall 0.00, 0.01, ...,
1.00), and mAP averages per-class AP over classes that have ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import AnnotationError, BeewatchError, EvaluationError
from .geometry import BoundingBox, NormalizedCenterBox, iou
from .timing import FrameTiming

__all__ = [
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
    "load_predictions_dir",
    "load_truth_dir",
    "format_summary_table",
    "RANGE_THRESHOLDS",
    "DEFAULT_CONF_THRESHOLD",
]

# mAP@0.5:0.95 threshold sweep: 0.5, 0.55, ..., 0.95.
RANGE_THRESHOLDS = tuple(0.5 + 0.05 * i for i in range(10))

# Operating point for the single precision/recall numbers in a summary row.
DEFAULT_CONF_THRESHOLD = 0.25


@dataclass(frozen=True)
class Detection:
    """A predicted box with its confidence score."""

    box: BoundingBox
    confidence: float
    class_id: int = 0
    image_id: str = ""

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise EvaluationError(f"confidence out of [0,1]: {self.confidence}")


@dataclass(frozen=True)
class GroundTruthBox:
    """An annotated truth box."""

    box: BoundingBox
    class_id: int = 0
    image_id: str = ""


@dataclass(frozen=True)
class MatchResult:
    """TP/FP/FN counts plus the matched (detection, truth, iou) triples."""

    true_positives: int
    false_positives: int
    false_negatives: int
    assignments: tuple[tuple[int, int, float], ...] = ()


@dataclass(frozen=True)
class APCurve:
    """Precision/recall curve and its interpolated average precision.

    ``defined`` is False when the class has no ground truth, in which case
    ``average_precision`` is 0 and must not enter any mean.
    """

    recalls: tuple[float, ...]
    precisions: tuple[float, ...]
    interpolated: tuple[float, ...]
    average_precision: float
    iou_threshold: float
    defined: bool = True


@dataclass
class EvalSummary:
    """One summary row: metric percentages plus optional stage timings."""

    precision: float
    recall: float
    map_at_05: float
    map_at_05_095: float
    per_class_ap: dict[int, float] = field(default_factory=dict)
    timing: FrameTiming | None = None
    conf_threshold: float = DEFAULT_CONF_THRESHOLD
    precision_defined: bool = True
    recall_defined: bool = True
    extra_maps: dict[float, float] = field(default_factory=dict)


def _validate_single_scene(
    dets: Sequence[Detection], gts: Sequence[GroundTruthBox]
) -> None:
    image_ids = {d.image_id for d in dets} | {g.image_id for g in gts}
    if len(image_ids) > 1:
        raise EvaluationError(f"mixed image_ids in one matching call: {sorted(image_ids)}")
    class_ids = {d.class_id for d in dets} | {g.class_id for g in gts}
    if len(class_ids) > 1:
        raise EvaluationError(f"mixed class_ids in one matching call: {sorted(class_ids)}")


def match_detections(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthBox],
    iou_threshold: float,
) -> MatchResult:
    """Greedy one-to-one matching for a single image and class.

    Detections are processed in descending confidence (input order breaks
    confidence ties); each takes the unmatched truth box of highest IoU if
    that IoU is at or above the threshold. Unmatched detections are false
    positives, unmatched truth boxes false negatives.
    """
    if not (0.0 < iou_threshold <= 1.0):
        raise EvaluationError(f"iou_threshold out of (0,1]: {iou_threshold}")
    _validate_single_scene(dets, gts)

    order = sorted(range(len(dets)), key=lambda i: (-dets[i].confidence, i))
    unmatched = set(range(len(gts)))
    assignments: list[tuple[int, int, float]] = []
    for det_idx in order:
        best_iou = 0.0
        best_gt = -1
        for gt_idx in sorted(unmatched):
            value = iou(dets[det_idx].box, gts[gt_idx].box)
            if value >= iou_threshold and value > best_iou:
                best_iou = value
                best_gt = gt_idx
        if best_gt >= 0:
            unmatched.discard(best_gt)
            assignments.append((det_idx, best_gt, best_iou))

    tp = len(assignments)
    return MatchResult(
        true_positives=tp,
        false_positives=len(dets) - tp,
        false_negatives=len(gts) - tp,
        assignments=tuple(sorted(assignments)),
    )


def precision(m: MatchResult) -> float:
    """TP / (TP + FP); 1.0 by convention when there are no detections."""
    denominator = m.true_positives + m.false_positives
    if denominator == 0:
        return 1.0
    return m.true_positives / denominator


def recall(m: MatchResult) -> float:
    """TP / (TP + FN); 1.0 (vacuous) by convention when there is no truth."""
    denominator = m.true_positives + m.false_negatives
    if denominator == 0:
        return 1.0
    return m.true_positives / denominator


def _accumulate_tp_flags(
    dets: Sequence[Detection],
    gts_by_image: Mapping[str, list[GroundTruthBox]],
    iou_threshold: float,
) -> np.ndarray:
    """TP/FP flags for detections sorted globally by descending confidence.

    Ties are broken by image_id then input index so the accumulation order
    is reproducible.
    """
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].confidence, dets[i].image_id, i))
    unmatched: dict[str, set[int]] = {
        image_id: set(range(len(boxes))) for image_id, boxes in gts_by_image.items()
    }
    flags = np.zeros(len(dets), dtype=bool)
    for rank, det_idx in enumerate(order):
        det = dets[det_idx]
        candidates = unmatched.get(det.image_id)
        if not candidates:
            continue
        gts = gts_by_image[det.image_id]
        best_iou = 0.0
        best_gt = -1
        for gt_idx in sorted(candidates):
            value = iou(det.box, gts[gt_idx].box)
            if value >= iou_threshold and value > best_iou:
                best_iou = value
                best_gt = gt_idx
        if best_gt >= 0:
            candidates.discard(best_gt)
            flags[rank] = True
    return flags


def average_precision(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthBox],
    iou_threshold: float,
) -> APCurve:
    """AP for one class over a whole dataset, 101-point interpolated."""
    if not (0.0 < iou_threshold <= 1.0):
        raise EvaluationError(f"iou_threshold out of (0,1]: {iou_threshold}")
    class_ids = {d.class_id for d in dets} | {g.class_id for g in gts}
    if len(class_ids) > 1:
        raise EvaluationError(f"average_precision expects one class, got {sorted(class_ids)}")

    if not gts:
        return APCurve((), (), (), 0.0, iou_threshold, defined=False)

    gts_by_image: dict[str, list[GroundTruthBox]] = {}
    for gt in gts:
        gts_by_image.setdefault(gt.image_id, []).append(gt)

    tp_flags = _accumulate_tp_flags(dets, gts_by_image, iou_threshold)
    samples = np.linspace(0.0, 1.0, 101)
    if len(tp_flags) == 0:
        interpolated = np.zeros(101)
        return APCurve((), (), tuple(interpolated), 0.0, iou_threshold)

    tp_cum = np.cumsum(tp_flags)
    k = np.arange(1, len(tp_flags) + 1)
    precisions = tp_cum / k
    recalls = tp_cum / len(gts)

    # Non-increasing precision envelope over recall, sampled at 101 points.
    envelope = np.maximum.accumulate(precisions[::-1])[::-1]
    idx = np.searchsorted(recalls, samples, side="left")
    interpolated = np.where(idx < len(recalls), envelope[np.minimum(idx, len(recalls) - 1)], 0.0)

    return APCurve(
        recalls=tuple(recalls.tolist()),
        precisions=tuple(precisions.tolist()),
        interpolated=tuple(interpolated.tolist()),
        average_precision=float(interpolated.mean()),
        iou_threshold=iou_threshold,
    )


def _group_by_class(
    dets: Sequence[Detection], gts: Sequence[GroundTruthBox]
) -> dict[int, tuple[list[Detection], list[GroundTruthBox]]]:
    grouped: dict[int, tuple[list[Detection], list[GroundTruthBox]]] = {}
    for det in dets:
        grouped.setdefault(det.class_id, ([], []))[0].append(det)
    for gt in gts:
        grouped.setdefault(gt.class_id, ([], []))[1].append(gt)
    return grouped


def map_at(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthBox],
    iou_threshold: float,
) -> float:
    """Unweighted mean of per-class AP; classes without truth are excluded."""
    aps = []
    for class_id, (class_dets, class_gts) in sorted(_group_by_class(dets, gts).items()):
        curve = average_precision(class_dets, class_gts, iou_threshold)
        if curve.defined:
            aps.append(curve.average_precision)
    if not aps:
        raise EvaluationError("no class has ground truth; mAP undefined")
    return float(np.mean(aps))


def map_range(dets: Sequence[Detection], gts: Sequence[GroundTruthBox]) -> float:
    """Mean of ``map_at`` over thresholds 0.5 to 0.95 in steps of 0.05."""
    return float(np.mean([map_at(dets, gts, t) for t in RANGE_THRESHOLDS]))


def _flatten(
    per_image: Mapping[str, Sequence], kind: str
) -> list:
    items = []
    for image_id, group in per_image.items():
        for item in group:
            if item.image_id and item.image_id != image_id:
                raise EvaluationError(
                    f"{kind} listed under image {image_id!r} carries image_id {item.image_id!r}"
                )
            items.append(item if item.image_id else replace(item, image_id=image_id))
    return items


def evaluate_dataset(
    predictions: Mapping[str, Sequence[Detection]],
    truth: Mapping[str, Sequence[GroundTruthBox]],
    timings: Sequence[FrameTiming] | None = None,
    conf_threshold: float = DEFAULT_CONF_THRESHOLD,
    match_iou: float = 0.5,
) -> EvalSummary:
    """One summary row over per-image prediction and truth lists.

    Precision and recall are reported at ``conf_threshold`` (matching at
    ``match_iou``); the mAP fields use every prediction regardless of
    confidence. Prediction image ids must be a subset of the truth's.
    """
    unknown = set(predictions) - set(truth)
    if unknown:
        raise EvaluationError(f"predictions for images missing from truth: {sorted(unknown)}")

    gts = _flatten(truth, "ground truth")
    if not gts:
        raise EvaluationError("empty truth set")
    dets = _flatten(predictions, "detection")

    # Operating-point precision/recall, accumulated per image and class.
    kept = [d for d in dets if d.confidence >= conf_threshold]
    tp = fp = fn = 0
    images = {d.image_id for d in kept} | {g.image_id for g in gts}
    for image_id in sorted(images):
        image_dets = [d for d in kept if d.image_id == image_id]
        image_gts = [g for g in gts if g.image_id == image_id]
        for class_id in sorted({x.class_id for x in image_dets} | {x.class_id for x in image_gts}):
            m = match_detections(
                [d for d in image_dets if d.class_id == class_id],
                [g for g in image_gts if g.class_id == class_id],
                match_iou,
            )
            tp += m.true_positives
            fp += m.false_positives
            fn += m.false_negatives

    precision_defined = (tp + fp) > 0
    recall_defined = (tp + fn) > 0
    p = tp / (tp + fp) if precision_defined else 1.0
    r = tp / (tp + fn) if recall_defined else 1.0

    per_class_ap = {
        class_id: 100.0 * average_precision(class_dets, class_gts, 0.5).average_precision
        for class_id, (class_dets, class_gts) in sorted(_group_by_class(dets, gts).items())
        if class_gts
    }

    timing = None
    if timings:
        from .timing import aggregate_timings

        timing = aggregate_timings(timings)

    return EvalSummary(
        precision=100.0 * p,
        recall=100.0 * r,
        map_at_05=100.0 * map_at(dets, gts, 0.5),
        map_at_05_095=100.0 * map_range(dets, gts),
        per_class_ap=per_class_ap,
        timing=timing,
        conf_threshold=conf_threshold,
        precision_defined=precision_defined,
        recall_defined=recall_defined,
    )


def _center_to_unit_corners(cx: float, cy: float, w: float, h: float) -> BoundingBox:
    # Unclamped on purpose: truth and predictions must agree near edges.
    n = NormalizedCenterBox(cx, cy, w, h)
    return BoundingBox(n.cx - n.w / 2, n.cy - n.h / 2, n.cx + n.w / 2, n.cy + n.h / 2)


def _parse_prediction_line(parts: list[str], path: Path, line_no: int) -> Detection:
    if len(parts) != 6:
        raise AnnotationError(
            f"expected 'class cx cy w h confidence', got {len(parts)} fields",
            path=str(path),
            line=line_no,
        )
    try:
        class_id = int(parts[0])
        cx, cy, w, h, conf = (float(v) for v in parts[1:])
    except ValueError as exc:
        raise AnnotationError(str(exc), path=str(path), line=line_no) from exc
    try:
        box = _center_to_unit_corners(cx, cy, w, h)
        return Detection(box=box, confidence=conf, class_id=class_id)
    except BeewatchError as exc:
        raise AnnotationError(str(exc), path=str(path), line=line_no) from exc


def load_predictions_dir(path: str | Path) -> dict[str, list[Detection]]:
    """Load the prediction interchange files: one text file per image with
    lines ``class_id cx cy w h confidence`` in normalized coordinates."""
    root = Path(path)
    if not root.is_dir():
        raise AnnotationError(f"not a directory: {root}")
    predictions: dict[str, list[Detection]] = {}
    for file in sorted(root.glob("*.txt")):
        dets = []
        for line_no, line in enumerate(file.read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            det = _parse_prediction_line(line.split(), file, line_no)
            dets.append(replace(det, image_id=file.stem))
        predictions[file.stem] = dets
    return predictions


def load_truth_dir(path: str | Path) -> dict[str, list[GroundTruthBox]]:
    """Load truth annotation files (``class cx cy w h`` per line)."""
    from .dataset import parse_annotation_file

    root = Path(path)
    if not root.is_dir():
        raise AnnotationError(f"not a directory: {root}")
    truth: dict[str, list[GroundTruthBox]] = {}
    for file in sorted(root.glob("*.txt")):
        annotations = parse_annotation_file(file.read_text(encoding="utf-8"), path=str(file))
        truth[file.stem] = [
            GroundTruthBox(
                box=_center_to_unit_corners(a.box.cx, a.box.cy, a.box.w, a.box.h),
                class_id=a.class_id,
                image_id=file.stem,
            )
            for a in annotations
        ]
    return truth


_TABLE_COLUMNS = ("Precision", "Recall", "mAP@.5", "mAP@.5:.95")


def format_summary_table(summaries: Mapping[str, EvalSummary], fmt: str = "text") -> str:
    """Render summary rows as a fixed-column table (or its CSV mirror).

    Undefined precision/recall values are marked with ``*``. Any
    ``extra_maps`` on a summary become additional mAP@t columns.
    """
    extra_thresholds = sorted({t for s in summaries.values() for t in s.extra_maps})
    headers = ["Model", *_TABLE_COLUMNS]
    headers += [f"mAP@{t:g}" for t in extra_thresholds]
    rows = []
    for name, s in summaries.items():
        row = [
            name,
            f"{s.precision:.1f}" + ("" if s.precision_defined else "*"),
            f"{s.recall:.1f}" + ("" if s.recall_defined else "*"),
            f"{s.map_at_05:.1f}",
            f"{s.map_at_05_095:.1f}",
        ]
        row += [f"{s.extra_maps[t]:.1f}" if t in s.extra_maps else "-" for t in extra_thresholds]
        rows.append(row)

    if fmt == "csv":
        lines = [",".join(headers)] + [",".join(row) for row in rows]
        return "\n".join(lines) + "\n"

    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines) + "\n"
