"""HTTP job service: upload a pattern, extract features, download artifacts.

Uploads are validated synchronously (size cap, config, CSV shape, point
cap) so the client gets an immediate 4xx; the extraction itself runs on a
bounded thread pool and the client polls the job resource. Artifacts are
plain files under an id-keyed directory, written once and immutable, and
produced by the same serializers the command line uses, so the two
interfaces emit identical bytes for identical inputs.
"""

from __future__ import annotations

import json
import os
import shutil
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from .core import MarkedPointPattern, parse_csv
from .errors import EmptyInput, FileTooLarge, MalformedRow, SashimiError
from .pipeline import (
    AnalysisConfig,
    config_from_dict,
    curves_json,
    diagram_csv,
    extract_features,
    features_csv,
    manifest_json,
)

DEFAULT_MAX_UPLOAD = 4 * 1024 * 1024
DEFAULT_MAX_POINTS = 500_000
DEFAULT_RETENTION_SECONDS = 24.0 * 3600.0

ARTIFACT_MEDIA_TYPES = {
    "features.csv": "text/csv",
    "curves.json": "application/json",
    "manifest.json": "application/json",
    "diagram.csv": "text/csv",
}

_STATE_RANK = {"queued": 0, "running": 1, "done": 2, "failed": 2}


@dataclass
class Settings:
    data_dir: Path
    max_upload: int = DEFAULT_MAX_UPLOAD
    max_points: int = DEFAULT_MAX_POINTS
    workers: int = 0  # 0 means one per hardware thread
    retention_seconds: float = DEFAULT_RETENTION_SECONDS
    static_dir: Path | None = None

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)
        if self.workers <= 0:
            self.workers = os.cpu_count() or 1
        if self.static_dir is not None:
            self.static_dir = Path(self.static_dir)

    @classmethod
    def from_env(cls, env=None) -> "Settings":
        env = os.environ if env is None else env
        data_dir = env.get("SASHIMI_DATA_DIR", "")
        static_dir = env.get("SASHIMI_STATIC_DIR", "")
        return cls(
            data_dir=Path(data_dir) if data_dir else Path("sashimi-data"),
            max_upload=int(env.get("SASHIMI_MAX_UPLOAD", DEFAULT_MAX_UPLOAD)),
            max_points=int(env.get("SASHIMI_MAX_POINTS", DEFAULT_MAX_POINTS)),
            workers=int(env.get("SASHIMI_WORKERS", 0)),
            retention_seconds=float(
                env.get("SASHIMI_RETENTION_SECONDS", DEFAULT_RETENTION_SECONDS)
            ),
            static_dir=Path(static_dir) if static_dir else None,
        )


@dataclass
class Job:
    id: str
    directory: Path
    state: str = "queued"
    progress: float = 0.0
    error: str | None = None
    created: float = field(default_factory=time.time)
    completed: float | None = None


class JobStore:
    """In-memory registry with forward-only state transitions."""

    def __init__(self):
        self._lock = threading.Lock()
        self._jobs: dict[str, Job] = {}

    def create(self, root: Path) -> Job:
        job_id = uuid.uuid4().hex
        job = Job(id=job_id, directory=root / job_id)
        with self._lock:
            self._jobs[job_id] = job
        return job

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)

    def transition(
        self,
        job_id: str,
        state: str,
        progress: float | None = None,
        error: str | None = None,
    ):
        with self._lock:
            job = self._jobs[job_id]
            if _STATE_RANK[state] < _STATE_RANK[job.state] or (
                job.state in ("done", "failed") and state != job.state
            ):
                raise RuntimeError(
                    f"illegal job transition {job.state} -> {state}"
                )
            job.state = state
            if progress is not None:
                job.progress = progress
            if error is not None:
                job.error = error
            if state in ("done", "failed"):
                job.progress = 1.0
                job.completed = time.time()

    def set_progress(self, job_id: str, progress: float):
        with self._lock:
            self._jobs[job_id].progress = progress

    def sweep_expired(self, retention_seconds: float):
        """Drop finished jobs whose retention window has passed."""
        now = time.time()
        with self._lock:
            expired = [
                job
                for job in self._jobs.values()
                if job.completed is not None
                and now - job.completed >= retention_seconds
            ]
            for job in expired:
                del self._jobs[job.id]
        for job in expired:
            shutil.rmtree(job.directory, ignore_errors=True)


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"detail": message}, status_code=status)


def _run_job(
    store: JobStore,
    job: Job,
    pattern: MarkedPointPattern,
    config: AnalysisConfig,
):
    try:
        store.transition(job.id, "running", progress=0.1)
        table, bundle = extract_features(pattern, config)
        store.set_progress(job.id, 0.8)
        job.directory.mkdir(parents=True, exist_ok=True)
        artifacts = {
            "features.csv": features_csv([table]),
            "curves.json": curves_json(bundle),
            "manifest.json": manifest_json(config),
            "diagram.csv": diagram_csv(bundle),
        }
        for name, blob in artifacts.items():
            (job.directory / name).write_bytes(blob)
        store.transition(job.id, "done")
    except Exception as exc:
        store.transition(job.id, "failed", error=str(exc))


def create_app(settings: Settings | None = None) -> FastAPI:
    settings = settings or Settings.from_env()
    settings.data_dir.mkdir(parents=True, exist_ok=True)
    store = JobStore()
    pool = ThreadPoolExecutor(max_workers=settings.workers)
    app = FastAPI(title="sashimi", docs_url=None, redoc_url=None)
    app.state.settings = settings
    app.state.store = store

    @app.post("/api/v1/jobs", status_code=201)
    async def submit(request: Request):
        content_type = request.headers.get("content-type", "")
        if "multipart/form-data" not in content_type:
            return _error(400, "expected a multipart/form-data request")
        try:
            form = await request.form()
        except Exception:
            return _error(400, "could not parse the multipart body")
        upload = form.get("file")
        config_part = form.get("config")
        if upload is None or config_part is None:
            return _error(400, "multipart body needs 'file' and 'config' parts")
        if isinstance(upload, str):
            return _error(400, "the 'file' part must be an uploaded file")
        data = await upload.read()
        if len(data) > settings.max_upload:
            return _error(
                413,
                f"upload is {len(data)} bytes, limit is {settings.max_upload}",
            )
        if not isinstance(config_part, str):
            config_part = (await config_part.read()).decode("utf-8", "replace")
        try:
            config = config_from_dict(json.loads(config_part))
        except (json.JSONDecodeError, ValueError, TypeError) as exc:
            return _error(422, f"invalid config: {exc}")
        try:
            pattern = parse_csv(data, max_bytes=settings.max_upload)
        except FileTooLarge as exc:
            return _error(413, str(exc))
        except (MalformedRow, EmptyInput) as exc:
            return _error(422, f"invalid input file: {exc}")
        if pattern.n > settings.max_points:
            return _error(
                422,
                f"input has {pattern.n} points, limit is {settings.max_points}",
            )
        store.sweep_expired(settings.retention_seconds)
        job = store.create(settings.data_dir)
        pool.submit(_run_job, store, job, pattern, config)
        return JSONResponse({"job_id": job.id}, status_code=201)

    @app.get("/api/v1/jobs/{job_id}")
    def status(job_id: str):
        job = store.get(job_id)
        if job is None:
            return _error(404, f"unknown job {job_id!r}")
        body = {
            "job_id": job.id,
            "state": job.state,
            "progress": job.progress,
            "error": job.error,
            "artifacts": [
                f"/api/v1/jobs/{job.id}/artifacts/{name}"
                for name in ARTIFACT_MEDIA_TYPES
            ]
            if job.state == "done"
            else [],
        }
        return JSONResponse(body)

    @app.get("/api/v1/jobs/{job_id}/artifacts/{name}")
    def artifact(job_id: str, name: str):
        job = store.get(job_id)
        if job is None:
            return _error(404, f"unknown job {job_id!r}")
        if name not in ARTIFACT_MEDIA_TYPES:
            return _error(404, f"unknown artifact {name!r}")
        if job.state != "done":
            return _error(409, f"job is {job.state}, artifacts need state 'done'")
        blob = (job.directory / name).read_bytes()
        return Response(blob, media_type=ARTIFACT_MEDIA_TYPES[name])

    @app.get("/api/v1/health")
    def health():
        return JSONResponse({"status": "ok", "service": "sashimi"})

    if settings.static_dir is not None and settings.static_dir.is_dir():
        app.mount(
            "/", StaticFiles(directory=settings.static_dir, html=True), name="ui"
        )

    return app
