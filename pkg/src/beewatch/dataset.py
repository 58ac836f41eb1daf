"""Annotation ingestion, corpus statistics, splits, and letterboxing.

Annotations are sidecar text files, one per image, each line
``<class> <cx> <cy> <w> <h>`` in normalized image-relative coordinates
(UTF-8, LF). An empty file is a valid no-bee image. Image decoding is out
of scope here: this module consumes dimensions plus annotation text, so
statistics stay testable without binary fixtures.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import AnnotationError, DatasetError, GeometryError
from .geometry import BoundingBox, NormalizedCenterBox

__all__ = [
    "Annotation",
    "AnnotatedImage",
    "DatasetStats",
    "SplitSpec",
    "LetterboxTransform",
    "parse_annotation_file",
    "format_annotation_file",
    "load_annotation_dir",
    "load_corpus",
    "compute_stats",
    "split",
    "letterbox",
    "format_stats_table",
    "histogram_csv",
    "round_display",
]

AREA_BIN_WIDTH = 0.01
ASPECT_BIN_WIDTH = 0.1
LETTERBOX_PAD_VALUE = 114  # gray fill, model-family convention


@dataclass(frozen=True)
class Annotation:
    class_id: int
    box: NormalizedCenterBox


@dataclass(frozen=True)
class AnnotatedImage:
    image_id: str
    width: int
    height: int
    annotations: tuple[Annotation, ...] = ()
    source: str = ""

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise DatasetError(f"{self.image_id}: non-positive dimensions {self.width}x{self.height}")


@dataclass(frozen=True)
class DatasetStats:
    """Corpus-level annotation statistics.

    ``mean`` and ``std`` are kept at full precision; rounding happens only
    at display time. ``std`` is the population standard deviation.
    """

    total_images: int
    total_boxes: int
    mean_boxes_per_image: float
    std_boxes_per_image: float
    max_boxes: int
    min_boxes: int
    zero_box_images: int
    boxes_per_image: dict[int, int] = field(default_factory=dict)
    area_histogram: dict[float, int] = field(default_factory=dict)
    aspect_ratio_histogram: dict[float, int] = field(default_factory=dict)


@dataclass(frozen=True)
class SplitSpec:
    """Named disjoint partitions covering the whole corpus."""

    partitions: dict[str, tuple[str, ...]]
    seed: int


def parse_annotation_file(text: str, *, path: str | None = None) -> list[Annotation]:
    """Parse one sidecar file. Blank lines are ignored; an empty file is a
    valid image with no boxes. Malformed lines and out-of-range coordinates
    raise with the offending line number."""
    annotations: list[Annotation] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise AnnotationError(
                f"expected 'class cx cy w h', got {len(parts)} fields", path=path, line=line_no
            )
        try:
            class_id = int(parts[0])
            cx, cy, w, h = (float(v) for v in parts[1:])
        except ValueError as exc:
            raise AnnotationError(str(exc), path=path, line=line_no) from exc
        if class_id < 0:
            raise AnnotationError(f"negative class id {class_id}", path=path, line=line_no)
        try:
            box = NormalizedCenterBox(cx, cy, w, h)
        except GeometryError as exc:
            raise AnnotationError(str(exc), path=path, line=line_no) from exc
        annotations.append(Annotation(class_id=class_id, box=box))
    return annotations


def format_annotation_file(annotations: Iterable[Annotation]) -> str:
    """Inverse of :func:`parse_annotation_file` (round-trip exact via repr)."""
    lines = [
        f"{a.class_id} {a.box.cx!r} {a.box.cy!r} {a.box.w!r} {a.box.h!r}"
        for a in annotations
    ]
    return "".join(line + "\n" for line in lines)


def load_annotation_dir(path: str | Path) -> dict[str, list[Annotation]]:
    """Load every ``*.txt`` sidecar in a directory, keyed by file stem."""
    root = Path(path)
    if not root.is_dir():
        raise AnnotationError(f"not a directory: {root}")
    return {
        file.stem: parse_annotation_file(file.read_text(encoding="utf-8"), path=str(file))
        for file in sorted(root.glob("*.txt"))
    }


def load_corpus(
    path: str | Path, image_size: tuple[int, int] = (416, 416)
) -> list[AnnotatedImage]:
    """Build a corpus from an annotation directory.

    Dimensions default to the 416px-square preprocessed frame; pass
    ``image_size`` when the sidecars describe a different frame.
    """
    width, height = image_size
    return [
        AnnotatedImage(
            image_id=image_id,
            width=width,
            height=height,
            annotations=tuple(annotations),
            source=str(Path(path) / f"{image_id}.txt"),
        )
        for image_id, annotations in load_annotation_dir(path).items()
    ]


def _bin_edge(value: float, width: float) -> float:
    return round(int(value / width) * width, 10)


def compute_stats(corpus: Sequence[AnnotatedImage]) -> DatasetStats:
    """Exact per-corpus counts plus box-count, area, and aspect histograms.

    Area and aspect ratio are computed on normalized coordinates and binned
    at ``AREA_BIN_WIDTH`` / ``ASPECT_BIN_WIDTH`` (bin key = lower edge).
    """
    if not corpus:
        raise DatasetError("empty corpus")

    counts = [len(img.annotations) for img in corpus]
    total_images = len(corpus)
    total_boxes = sum(counts)
    mean = total_boxes / total_images
    variance = sum((c - mean) ** 2 for c in counts) / total_images

    boxes_per_image: dict[int, int] = {}
    for c in counts:
        boxes_per_image[c] = boxes_per_image.get(c, 0) + 1

    area_histogram: dict[float, int] = {}
    aspect_histogram: dict[float, int] = {}
    for img in corpus:
        for a in img.annotations:
            area_bin = _bin_edge(a.box.w * a.box.h, AREA_BIN_WIDTH)
            aspect_bin = _bin_edge(a.box.w / a.box.h, ASPECT_BIN_WIDTH)
            area_histogram[area_bin] = area_histogram.get(area_bin, 0) + 1
            aspect_histogram[aspect_bin] = aspect_histogram.get(aspect_bin, 0) + 1

    return DatasetStats(
        total_images=total_images,
        total_boxes=total_boxes,
        mean_boxes_per_image=mean,
        std_boxes_per_image=variance ** 0.5,
        max_boxes=max(counts),
        min_boxes=min(counts),
        zero_box_images=boxes_per_image.get(0, 0),
        boxes_per_image=dict(sorted(boxes_per_image.items())),
        area_histogram=dict(sorted(area_histogram.items())),
        aspect_ratio_histogram=dict(sorted(aspect_histogram.items())),
    )


def split(
    corpus: Sequence[AnnotatedImage] | Sequence[str],
    counts: Sequence[int] | None = None,
    ratios: Sequence[float] | None = None,
    seed: int = 0,
    names: Sequence[str] = ("train", "val", "test"),
) -> SplitSpec:
    """Shuffle image ids deterministically and partition them.

    Exactly one of ``counts`` (must sum to the corpus size) or ``ratios``
    (must sum to 1; remainders go to the earliest partitions) is required.
    """
    ids = [img if isinstance(img, str) else img.image_id for img in corpus]
    if len(set(ids)) != len(ids):
        raise DatasetError("duplicate image ids in corpus")
    if (counts is None) == (ratios is None):
        raise DatasetError("provide exactly one of counts or ratios")
    if counts is None:
        if abs(sum(ratios) - 1.0) > 1e-9:
            raise DatasetError(f"ratios must sum to 1, got {sum(ratios)}")
        counts = [int(len(ids) * r) for r in ratios]
        for i in range(len(ids) - sum(counts)):
            counts[i % len(counts)] += 1
    if len(counts) != len(names):
        raise DatasetError(f"expected {len(names)} counts, got {len(counts)}")
    if sum(counts) != len(ids):
        raise DatasetError(f"counts sum to {sum(counts)}, corpus has {len(ids)} images")

    shuffled = list(ids)
    random.Random(seed).shuffle(shuffled)
    partitions: dict[str, tuple[str, ...]] = {}
    offset = 0
    for name, count in zip(names, counts):
        partitions[name] = tuple(shuffled[offset : offset + count])
        offset += count
    return SplitSpec(partitions=partitions, seed=seed)


@dataclass(frozen=True)
class LetterboxTransform:
    """Aspect-preserving resize to a square target with centered padding.

    Odd padding remainders put the extra pixel on the bottom/right. The pad
    fill value is recorded for the media layer; box mapping here is pure
    geometry.
    """

    scale: float
    pad_left: int
    pad_top: int
    content_w: int
    content_h: int
    target: int
    pad_value: int = LETTERBOX_PAD_VALUE

    @property
    def pad_right(self) -> int:
        return self.target - self.content_w - self.pad_left

    @property
    def pad_bottom(self) -> int:
        return self.target - self.content_h - self.pad_top

    def apply_to_box(self, box: BoundingBox) -> BoundingBox:
        """Map a source-frame pixel box into the letterboxed frame."""
        return BoundingBox(
            box.x_min * self.scale + self.pad_left,
            box.y_min * self.scale + self.pad_top,
            box.x_max * self.scale + self.pad_left,
            box.y_max * self.scale + self.pad_top,
        )

    def invert_box(self, box: BoundingBox) -> BoundingBox:
        """Map a letterboxed-frame box back to source-frame pixels."""
        return BoundingBox(
            (box.x_min - self.pad_left) / self.scale,
            (box.y_min - self.pad_top) / self.scale,
            (box.x_max - self.pad_left) / self.scale,
            (box.y_max - self.pad_top) / self.scale,
        )


def letterbox(width: int, height: int, target: int = 416) -> LetterboxTransform:
    """Plan the aspect-preserving resize of ``width``x``height`` into a
    ``target`` square with centered gray padding."""
    if width <= 0 or height <= 0:
        raise DatasetError(f"non-positive dimensions {width}x{height}")
    if target <= 0:
        raise DatasetError(f"non-positive target {target}")
    scale = target / max(width, height)
    content_w = int(round(width * scale))
    content_h = int(round(height * scale))
    pad_left = (target - content_w) // 2
    pad_top = (target - content_h) // 2
    return LetterboxTransform(
        scale=scale,
        pad_left=pad_left,
        pad_top=pad_top,
        content_w=content_w,
        content_h=content_h,
        target=target,
    )


def round_display(value: float, places: int = 2) -> str:
    """Half-up decimal rounding for display (1.385 -> '1.39')."""
    quantum = Decimal(1).scaleb(-places)
    return str(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


_STATS_ROWS = (
    ("Total Number of Images", lambda s: f"{s.total_images:,}"),
    ("Total Number of Bees", lambda s: f"{s.total_boxes:,}"),
    ("Average Number of Bees per Image", lambda s: round_display(s.mean_boxes_per_image)),
    ("Standard Deviation of Bees per Image", lambda s: round_display(s.std_boxes_per_image)),
    ("Maximum Number of Bees in a Single Image", lambda s: f"{s.max_boxes:,}"),
    ("Minimum Number of Bees in a Single Image", lambda s: f"{s.min_boxes:,}"),
    ("Number of Images with No Bees", lambda s: f"{s.zero_box_images:,}"),
)


def format_stats_table(stats: DatasetStats) -> str:
    """Two-column Metric/Value text table."""
    labels = [label for label, _ in _STATS_ROWS]
    width = max(len(label) for label in labels)
    lines = [f"{'Metric'.ljust(width)}  Value"]
    for label, render in _STATS_ROWS:
        lines.append(f"{label.ljust(width)}  {render(stats)}")
    return "\n".join(lines) + "\n"


def histogram_csv(histogram: Mapping[int | float, int]) -> str:
    """Histogram as ``value,count`` CSV lines."""
    lines = ["value,count"]
    for value, count in histogram.items():
        value_text = f"{value:g}" if isinstance(value, float) else str(value)
        lines.append(f"{value_text},{count}")
    return "\n".join(lines) + "\n"
