"""Shared fixtures: random boxes, synthetic truth directories, videos."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from beewatch.evaluation import Detection, GroundTruthBox
from beewatch.geometry import BoundingBox


def random_box(rng: np.random.Generator, frame: float = 100.0, min_side: float = 1.0) -> BoundingBox:
    x0, y0 = rng.uniform(0, frame - min_side, size=2)
    w = rng.uniform(min_side, frame - x0)
    h = rng.uniform(min_side, frame - y0)
    return BoundingBox(x0, y0, x0 + w, y0 + h)


def random_scene(
    rng: np.random.Generator,
    max_boxes: int = 6,
    image_id: str = "img",
    clustered: bool = True,
) -> tuple[list[Detection], list[GroundTruthBox]]:
    """Random detections and truth for one image.

    ``clustered`` draws boxes from a small frame so overlaps (and therefore
    contested matches) are common. Confidences are made distinct so greedy
    order is unambiguous.
    """
    frame = 20.0 if clustered else 100.0
    n_gt = int(rng.integers(0, max_boxes + 1))
    n_det = int(rng.integers(0, max_boxes + 1))
    gts = [GroundTruthBox(box=random_box(rng, frame), image_id=image_id) for _ in range(n_gt)]
    confidences = rng.permutation(np.linspace(0.05, 0.99, n_det)) if n_det else []
    dets = [
        Detection(box=random_box(rng, frame), confidence=float(c), image_id=image_id)
        for c in confidences
    ]
    return dets, gts


def contested_scene(
    rng: np.random.Generator, max_boxes: int = 6, image_id: str = "img"
) -> tuple[list[Detection], list[GroundTruthBox]]:
    """Scene where most detections are jittered copies of truth boxes, so
    several detections compete for the same truth and greedy choices matter."""
    n_gt = int(rng.integers(0, max_boxes + 1))
    n_det = int(rng.integers(0, max_boxes + 1))
    gts = [GroundTruthBox(box=random_box(rng, 20.0), image_id=image_id) for _ in range(n_gt)]
    confidences = rng.permutation(np.linspace(0.05, 0.99, n_det)) if n_det else []
    dets = []
    for conf in confidences:
        if gts and rng.random() < 0.75:
            target = gts[int(rng.integers(0, len(gts)))].box
            dx, dy = rng.uniform(-0.35, 0.35, size=2) * (target.width, target.height)
            grow = rng.uniform(0.75, 1.3)
            w, h = target.width * grow, target.height * grow
            cx, cy = target.center
            box = BoundingBox(
                cx + dx - w / 2, cy + dy - h / 2, cx + dx + w / 2, cy + dy + h / 2
            )
        else:
            box = random_box(rng, 20.0)
        dets.append(Detection(box=box, confidence=float(conf), image_id=image_id))
    return dets, gts


def write_truth_dir(path: Path, truth: dict[int, list[tuple[int, float, float, float, float]]]) -> Path:
    """Write per-frame annotation sidecars: frame index -> rows of
    (class, cx, cy, w, h)."""
    path.mkdir(parents=True, exist_ok=True)
    for frame_index, rows in truth.items():
        lines = [f"{c} {cx} {cy} {w} {h}" for c, cx, cy, w, h in rows]
        (path / f"{frame_index:06d}.txt").write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8"
        )
    return path


def write_synthetic_video(
    path: Path,
    width: int = 416,
    height: int = 416,
    fps: float = 30.0,
    frame_count: int = 300,
    fail_at_frame: int | None = None,
) -> Path:
    payload = {
        "width": width,
        "height": height,
        "fps": fps,
        "frame_count": frame_count,
    }
    if fail_at_frame is not None:
        payload["fail_at_frame"] = fail_at_frame
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240416)


@pytest.fixture
def data_dir() -> Path:
    return Path(__file__).parent / "data"
