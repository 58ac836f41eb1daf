"""Filesystem-backed detection jobs and the worker pool that runs them.

One directory per job holds the uploaded input, a JSON journal, and the
artifacts (report CSV, summary JSON, annotated frame gallery). Journal
writes are atomic (temp file + rename), so a crash never loses a job: on
restart, anything found queued or processing is re-queued.
"""

from __future__ import annotations

import json
import os
import queue
import threading
import uuid
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import BinaryIO, Iterable

from .backends import DetectorBackend, parse_backend_spec
from .errors import BeewatchError, JobError
from .pipeline import DetectionEvent, KeyframePolicy, per_second_series, process_video
from .reporting import build_report, summarize, write_csv
from .video import Frame, open_video

__all__ = ["JobRecord", "JobStore", "JobRunner", "run_detection_job", "JOB_STATES"]

JOB_STATES = ("queued", "processing", "complete", "failed", "partial")
TERMINAL_STATES = ("complete", "failed", "partial")
GALLERY_BOX_COLOR = (255, 212, 0)


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass
class JobRecord:
    """Journal contents for one job."""

    job_id: str
    state: str = "queued"
    progress: float = 0.0
    submitted_at: str = field(default_factory=_utcnow)
    finished_at: str | None = None
    error: str | None = None
    input_name: str = ""
    frames_count: int = 0
    note: str | None = None

    def to_api(self) -> dict:
        """The seven-field job view served over HTTP."""
        artifacts = None
        if self.state in ("complete", "partial"):
            artifacts = {
                "report_csv": f"/api/jobs/{self.job_id}/report.csv",
                "summary_json": f"/api/jobs/{self.job_id}/summary.json",
                "frames": self.frames_count,
            }
        return {
            "job_id": self.job_id,
            "state": self.state,
            "progress": self.progress,
            "submitted_at": self.submitted_at,
            "finished_at": self.finished_at,
            "error": self.error,
            "artifacts": artifacts,
        }


class JobStore:
    """Directory-per-job persistence with atomic journal updates."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "jobs").mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._job_locks: dict[str, threading.Lock] = {}

    def _job_lock(self, job_id: str) -> threading.Lock:
        with self._lock:
            return self._job_locks.setdefault(job_id, threading.Lock())

    def job_dir(self, job_id: str) -> Path:
        return self.root / "jobs" / job_id

    def input_path(self, job_id: str) -> Path:
        record = self.get(job_id)
        return self.job_dir(job_id) / "input" / record.input_name

    def artifact_path(self, job_id: str, name: str) -> Path:
        return self.job_dir(job_id) / name

    def create(self, filename: str, stream: BinaryIO, size_limit: int | None = None) -> JobRecord:
        """Persist an upload and journal a queued job.

        Raises :class:`JobError` for empty uploads or, when ``size_limit``
        is given, uploads exceeding it (partial file removed).
        """
        job_id = uuid.uuid4().hex[:12]
        job_dir = self.job_dir(job_id)
        input_dir = job_dir / "input"
        input_dir.mkdir(parents=True)
        safe_name = Path(filename).name or "upload"
        target = input_dir / safe_name
        written = 0
        with target.open("wb") as sink:
            while True:
                chunk = stream.read(1 << 20)
                if not chunk:
                    break
                written += len(chunk)
                if size_limit is not None and written > size_limit:
                    sink.close()
                    target.unlink(missing_ok=True)
                    os.rmdir(input_dir)
                    os.rmdir(job_dir)
                    raise JobError(f"upload exceeds the {size_limit} byte limit")
                sink.write(chunk)
        if written == 0:
            target.unlink(missing_ok=True)
            os.rmdir(input_dir)
            os.rmdir(job_dir)
            raise JobError("empty upload")
        record = JobRecord(job_id=job_id, input_name=safe_name)
        self._write(record)
        return record

    def get(self, job_id: str) -> JobRecord:
        journal = self.job_dir(job_id) / "job.json"
        if not journal.is_file():
            raise JobError(f"unknown job {job_id}")
        payload = json.loads(journal.read_text(encoding="utf-8"))
        return JobRecord(**payload)

    def update(self, job_id: str, **changes) -> JobRecord:
        """Apply field changes under the job's lock; progress may only grow."""
        with self._job_lock(job_id):
            return self._update_locked(job_id, changes)

    def _update_locked(self, job_id: str, changes: dict) -> JobRecord:
        record = self.get(job_id)
        if "progress" in changes:
            changes["progress"] = max(record.progress, changes["progress"])
        for key, value in changes.items():
            if not hasattr(record, key):
                raise JobError(f"unknown job field {key!r}")
            setattr(record, key, value)
        if record.state not in JOB_STATES:
            raise JobError(f"invalid state {record.state!r}")
        self._write(record)
        return record

    def claim(self, job_id: str) -> bool:
        """Atomically move a queued job to processing; False if not claimable."""
        with self._job_lock(job_id):
            if self.get(job_id).state != "queued":
                return False
            self._update_locked(job_id, {"state": "processing"})
            return True

    def _write(self, record: JobRecord) -> None:
        journal = self.job_dir(record.job_id) / "job.json"
        temp = journal.with_suffix(".json.tmp")
        temp.write_text(json.dumps(asdict(record), indent=2), encoding="utf-8")
        os.replace(temp, journal)

    def list_ids(self) -> list[str]:
        jobs_dir = self.root / "jobs"
        return sorted(p.name for p in jobs_dir.iterdir() if (p / "job.json").is_file())

    def recover(self) -> list[str]:
        """Re-queue jobs left queued or processing by a previous run."""
        recovered = []
        for job_id in self.list_ids():
            record = self.get(job_id)
            if record.state in ("queued", "processing"):
                self.update(job_id, state="queued", note="requeued after restart")
                recovered.append(job_id)
        return recovered


class _JobInterrupted(Exception):
    """Raised inside a worker when the runner is stopping; the job's
    journal stays in ``processing`` so a restart re-queues it."""


class JobRunner:
    """Bounded worker pool that owns all job processing.

    Each worker keeps its own backend instance per spec string, honoring
    the one-frame-at-a-time backend contract while letting expensive model
    backends be reused across jobs. Stopping aborts in-flight jobs at the
    next keyframe boundary, leaving their journals re-queueable.
    """

    def __init__(
        self,
        store: JobStore,
        backend_spec: str,
        workers: int = 2,
        stride: int = 2,
        seed: int = 0,
        write_gallery: bool = True,
    ):
        if workers < 1:
            raise JobError(f"workers must be >= 1, got {workers}")
        self.store = store
        self.backend_spec = backend_spec
        self.policy = KeyframePolicy(stride=stride)
        self.seed = seed
        self.write_gallery = write_gallery
        self._queue: queue.Queue[str | None] = queue.Queue()
        self._threads: list[threading.Thread] = []
        self._local = threading.local()
        self._workers = workers
        self._stopping = threading.Event()

    def start(self) -> None:
        self._stopping.clear()
        for n in range(self._workers):
            thread = threading.Thread(target=self._worker, name=f"beewatch-worker-{n}", daemon=True)
            thread.start()
            self._threads.append(thread)

    def stop(self) -> None:
        self._stopping.set()
        for _ in self._threads:
            self._queue.put(None)
        for thread in self._threads:
            thread.join(timeout=30)
        self._threads.clear()

    def submit(self, job_id: str) -> None:
        self._queue.put(job_id)

    def submit_recovered(self, job_ids: Iterable[str]) -> None:
        for job_id in job_ids:
            self.submit(job_id)

    def _backend(self) -> DetectorBackend:
        cached = getattr(self._local, "backend", None)
        if cached is None:
            cached = parse_backend_spec(self.backend_spec, seed=self.seed)
            self._local.backend = cached
        return cached

    def _worker(self) -> None:
        while True:
            job_id = self._queue.get()
            if job_id is None:
                return
            try:
                self._process(job_id)
            except _JobInterrupted:
                return  # journal left in processing; restart re-queues
            except Exception as exc:  # worker must survive any job failure
                try:
                    self.store.update(
                        job_id, state="failed", error=str(exc), finished_at=_utcnow()
                    )
                except Exception:
                    pass
            finally:
                self._queue.task_done()

    def _process(self, job_id: str) -> None:
        if not self.store.claim(job_id):
            return  # already claimed or finished; process at most once
        input_path = self.store.input_path(job_id)

        last_progress = {"value": 0.0}

        def on_progress(fraction: float) -> None:
            if self._stopping.is_set():
                raise _JobInterrupted(job_id)
            if fraction - last_progress["value"] >= 0.01 or fraction >= 1.0:
                last_progress["value"] = fraction
                self.store.update(job_id, progress=fraction)

        try:
            result, frames_count = run_detection_job(
                input_path,
                self._backend(),
                self.store.job_dir(job_id),
                policy=self.policy,
                write_gallery=self.write_gallery,
                progress=on_progress,
            )
        except BeewatchError as exc:
            self.store.update(job_id, state="failed", error=str(exc), finished_at=_utcnow())
            return

        self.store.update(
            job_id,
            state="partial" if result.truncated else "complete",
            progress=1.0,
            error=result.truncation_reason,
            finished_at=_utcnow(),
            frames_count=frames_count,
        )


def run_detection_job(
    video_path: str | Path,
    backend: DetectorBackend,
    out_dir: str | Path,
    policy: KeyframePolicy = KeyframePolicy(),
    write_gallery: bool = True,
    progress=None,
):
    """Process a video and write the artifact set into ``out_dir``.

    Writes ``report.csv``, ``summary.json``, and (for events with
    detections) ``gallery/NNNNNN.png``. Both the CLI and the service go
    through here, which is what makes their artifacts byte-identical.
    Returns the pipeline result and the gallery image count.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    gallery_dir = out_dir / "gallery"
    frame_counter = {"n": 0}

    def on_event(event: DetectionEvent, frame: Frame) -> None:
        if not write_gallery or not event.detections:
            return
        gallery_dir.mkdir(exist_ok=True)
        _render_annotated_frame(frame, event, gallery_dir / f"{frame_counter['n']:06d}.png")
        frame_counter["n"] += 1

    with open_video(video_path) as source:
        result = process_video(source, backend, policy, progress=progress, on_event=on_event)

    series = [(s.second, s.count) for s in per_second_series(result.events)]
    rows = build_report(series)
    (out_dir / "report.csv").write_bytes(write_csv(rows))
    (out_dir / "summary.json").write_text(
        json.dumps(summarize(rows).to_json(), indent=2), encoding="utf-8"
    )
    return result, frame_counter["n"]


def _render_annotated_frame(frame: Frame, event: DetectionEvent, target: Path) -> None:
    """Draw detection boxes on the frame (gray canvas when pixel-free)."""
    import numpy as np
    from PIL import Image, ImageDraw

    if frame.image is not None:
        image = Image.fromarray(frame.image)
    else:
        image = Image.fromarray(
            np.full((frame.height, frame.width, 3), 114, dtype=np.uint8)
        )
    draw = ImageDraw.Draw(image)
    for detection in event.detections:
        box = detection.box
        draw.rectangle(
            (box.x_min, box.y_min, box.x_max, box.y_max), outline=GALLERY_BOX_COLOR, width=2
        )
    image.save(target, format="PNG")
