"""HTTP service around the detection pipeline.

Endpoints::

    POST /api/jobs                     multipart upload, field "video"
    GET  /api/jobs/{id}                job status snapshot
    GET  /api/jobs/{id}/report.csv     report artifact
    GET  /api/jobs/{id}/summary.json   summary artifact
    GET  /api/jobs/{id}/frames/{n}     annotated gallery image
    GET  /api/health

Uploads return the job id immediately; processing happens on a bounded
worker pool and clients poll for state. Artifacts are byte-identical to
what the offline pipeline produces for the same input and seed.
"""

from __future__ import annotations

import contextlib
from pathlib import Path

from fastapi import FastAPI, HTTPException, UploadFile
from fastapi.responses import FileResponse, JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from .errors import JobError
from .jobs import JobRunner, JobStore

__all__ = ["create_app", "DEFAULT_UPLOAD_LIMIT", "KNOWN_CONTAINERS"]

DEFAULT_UPLOAD_LIMIT = 512 * 1024 * 1024
KNOWN_CONTAINERS = (".mp4", ".avi", ".mov", ".mkv", ".webm", ".synth.json")


def create_app(
    data_dir: str | Path,
    backend_spec: str,
    workers: int = 2,
    upload_limit: int = DEFAULT_UPLOAD_LIMIT,
    stride: int = 2,
    seed: int = 0,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Build the service app; workers start with the app lifespan."""
    store = JobStore(data_dir)
    runner = JobRunner(store, backend_spec, workers=workers, stride=stride, seed=seed)

    @contextlib.asynccontextmanager
    async def lifespan(_: FastAPI):
        runner.submit_recovered(store.recover())
        runner.start()
        yield
        runner.stop()

    app = FastAPI(title="beewatch", lifespan=lifespan)
    app.state.store = store
    app.state.runner = runner

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/api/jobs")
    def submit_video(video: UploadFile) -> JSONResponse:
        name = video.filename or ""
        if not name.endswith(KNOWN_CONTAINERS):
            raise HTTPException(
                status_code=400,
                detail=f"unrecognized container {name!r}; accepted: {', '.join(KNOWN_CONTAINERS)}",
            )
        try:
            record = store.create(name, video.file, size_limit=upload_limit)
        except JobError as exc:
            status = 413 if "limit" in str(exc) else 400
            raise HTTPException(status_code=status, detail=str(exc)) from exc
        runner.submit(record.job_id)
        return JSONResponse(record.to_api())

    def _get_record(job_id: str):
        try:
            return store.get(job_id)
        except JobError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str) -> JSONResponse:
        return JSONResponse(_get_record(job_id).to_api())

    def _artifact_or_conflict(job_id: str, name: str) -> Path:
        record = _get_record(job_id)
        if record.state not in ("complete", "partial"):
            raise HTTPException(
                status_code=409, detail=f"job {job_id} is {record.state}; artifacts not ready"
            )
        path = store.artifact_path(job_id, name)
        if not path.is_file():
            raise HTTPException(status_code=404, detail=f"no artifact {name}")
        return path

    @app.get("/api/jobs/{job_id}/report.csv")
    def report_csv(job_id: str) -> Response:
        path = _artifact_or_conflict(job_id, "report.csv")
        return Response(content=path.read_bytes(), media_type="text/csv")

    @app.get("/api/jobs/{job_id}/summary.json")
    def summary_json(job_id: str) -> Response:
        path = _artifact_or_conflict(job_id, "summary.json")
        return Response(content=path.read_bytes(), media_type="application/json")

    @app.get("/api/jobs/{job_id}/frames/{n}")
    def gallery_frame(job_id: str, n: int) -> FileResponse:
        record = _get_record(job_id)
        if record.state not in ("complete", "partial"):
            raise HTTPException(
                status_code=409, detail=f"job {job_id} is {record.state}; artifacts not ready"
            )
        if n < 0 or n >= record.frames_count:
            raise HTTPException(status_code=404, detail=f"frame {n} beyond gallery")
        return FileResponse(
            store.artifact_path(job_id, "gallery") / f"{n:06d}.png", media_type="image/png"
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
