"""HTTP job service.

A FastAPI app over a bounded worker pool. Jobs and their reports persist
as plain files under a workspace directory; uploaded datasets are stored
content-addressed and referenced from specs as ``dataset:<id>`` loader
paths. Endpoints are the stable contract the web portal builds on.
"""

from __future__ import annotations

import email.parser
import email.policy
import hashlib
import json
import os
import re
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .apps import execute_job
from .config import JobSpec, spec_from_dict, spec_to_yaml
from .errors import SpecValidation, UnknownJob

_DATASET_REF = re.compile(r"^dataset:([0-9a-f]{16})$")


@dataclass
class JobRecord:
    job_id: str
    state: str  # queued -> running -> succeeded | failed
    submitted_at: str
    finished_at: str | None = None
    application: str = ""
    error: str | None = None
    report_path: str | None = None


class JobManager:
    """Runs jobs on a bounded pool, persisting records atomically."""

    def __init__(self, workspace: str | Path, max_workers: int = 2):
        self.workspace = Path(workspace)
        self.jobs_dir = self.workspace / "jobs"
        self.datasets_dir = self.workspace / "datasets"
        self.jobs_dir.mkdir(parents=True, exist_ok=True)
        self.datasets_dir.mkdir(parents=True, exist_ok=True)
        self._pool = ThreadPoolExecutor(max_workers=max_workers)
        self._lock = threading.Lock()
        self._records: dict[str, JobRecord] = {}
        self._order: list[str] = []
        self._load_persisted()

    def _load_persisted(self) -> None:
        """Rehydrate records from a previous run of this workspace.

        Jobs caught mid-flight by a shutdown have no worker anymore, so
        their records are repaired to failed instead of polling forever.
        """
        loaded: list[JobRecord] = []
        for record_path in sorted(self.jobs_dir.glob("*/record.json")):
            try:
                record = JobRecord(**json.loads(record_path.read_text(encoding="utf-8")))
            except (TypeError, ValueError):
                continue  # foreign or partial file: don't serve garbage
            if record.state not in ("succeeded", "failed"):
                record.state = "failed"
                record.error = "interrupted by service restart"
                record.finished_at = datetime.now(timezone.utc).isoformat()
                self._persist(record)
            loaded.append(record)
        loaded.sort(key=lambda r: (r.submitted_at, r.job_id))
        for record in loaded:
            self._records[record.job_id] = record
            self._order.append(record.job_id)

    # -- datasets ---------------------------------------------------------

    def store_dataset(self, filename: str, content: bytes) -> str:
        digest = hashlib.sha256(content).hexdigest()
        dataset_id = digest[:16]
        target = self.datasets_dir / dataset_id
        target.mkdir(exist_ok=True)
        safe_name = Path(filename).name or "data.log"
        (target / safe_name).write_bytes(content)
        meta = {"filename": safe_name, "sha256": digest, "size": len(content)}
        _atomic_write_text(target / "meta.json", json.dumps(meta, sort_keys=True))
        return dataset_id

    def resolve_dataset(self, spec: JobSpec) -> JobSpec:
        match = _DATASET_REF.match(spec.loader.path)
        if match is None:
            return spec
        dataset_id = match.group(1)
        meta_path = self.datasets_dir / dataset_id / "meta.json"
        if not meta_path.is_file():
            raise SpecValidation([f"loader.path: unknown dataset {dataset_id!r}"])
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        spec.loader.path = str(self.datasets_dir / dataset_id / meta["filename"])
        return spec

    # -- jobs -------------------------------------------------------------

    def submit(self, spec: JobSpec) -> str:
        job_id = uuid.uuid4().hex[:12]
        record = JobRecord(
            job_id=job_id,
            state="queued",
            submitted_at=datetime.now(timezone.utc).isoformat(),
            application=spec.application,
        )
        job_dir = self.jobs_dir / job_id
        job_dir.mkdir(parents=True)
        _atomic_write_text(job_dir / "spec.yaml", spec_to_yaml(spec))
        with self._lock:
            self._records[job_id] = record
            self._order.append(job_id)
        self._persist(record)
        self._pool.submit(self._run, job_id, spec)
        return job_id

    def _run(self, job_id: str, spec: JobSpec) -> None:
        self._transition(job_id, "running")
        job_dir = self.jobs_dir / job_id
        try:
            execute_job(spec, out_dir=job_dir)
            with self._lock:
                record = self._records[job_id]
                record.report_path = str(job_dir / "report.txt")
            self._transition(job_id, "succeeded")
        except Exception as exc:  # job isolation: any failure is recorded, not raised
            with self._lock:
                self._records[job_id].error = f"{type(exc).__name__}: {exc}"
            self._transition(job_id, "failed")

    def _transition(self, job_id: str, state: str) -> None:
        with self._lock:
            record = self._records[job_id]
            record.state = state
            if state in ("succeeded", "failed"):
                record.finished_at = datetime.now(timezone.utc).isoformat()
            snapshot = JobRecord(**asdict(record))
        self._persist(snapshot)

    def _persist(self, record: JobRecord) -> None:
        _atomic_write_text(
            self.jobs_dir / record.job_id / "record.json",
            json.dumps(asdict(record), sort_keys=True),
        )

    def get(self, job_id: str) -> JobRecord:
        with self._lock:
            record = self._records.get(job_id)
        if record is None:
            raise UnknownJob(job_id)
        return record

    def report_text(self, job_id: str) -> str:
        record = self.get(job_id)
        if record.state != "succeeded" or record.report_path is None:
            raise UnknownJob(f"{job_id}: no report (state={record.state})")
        return Path(record.report_path).read_text(encoding="utf-8")

    def list_jobs(self) -> list[JobRecord]:
        with self._lock:
            return [self._records[job_id] for job_id in self._order]

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _parse_multipart(content_type: str, body: bytes) -> list[tuple[str, str, bytes]]:
    """Minimal multipart/form-data parsing: (field name, filename, payload).

    Parsed with the stdlib email machinery so no extra dependency is
    needed for file uploads.
    """
    header = f"Content-Type: {content_type}\r\nMIME-Version: 1.0\r\n\r\n".encode()
    message = email.parser.BytesParser(policy=email.policy.HTTP).parsebytes(header + body)
    parts = []
    for part in message.iter_parts():
        disposition = part.get("Content-Disposition", "")
        if "form-data" not in disposition:
            continue
        name = part.get_param("name", header="Content-Disposition") or ""
        filename = part.get_filename() or ""
        payload = part.get_payload(decode=True) or b""
        parts.append((name, filename, payload))
    return parts


def create_app(workspace: str | Path, max_workers: int = 2) -> FastAPI:
    app = FastAPI(title="loglens service")
    manager = JobManager(workspace, max_workers=max_workers)
    app.state.manager = manager

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/datasets")
    async def upload_dataset(request: Request):
        content_type = request.headers.get("content-type", "")
        raw = await request.body()
        if content_type.startswith("multipart/form-data"):
            parts = _parse_multipart(content_type, raw)
            files = [(fn, payload) for _, fn, payload in parts if fn]
            if not files:
                return JSONResponse({"errors": ["no file part in upload"]}, status_code=400)
            filename, content = files[0]
        elif raw:
            filename, content = "data.log", raw
        else:
            return JSONResponse({"errors": ["empty upload"]}, status_code=400)
        dataset_id = manager.store_dataset(filename, content)
        return {"dataset_id": dataset_id}

    @app.post("/api/jobs")
    async def submit_job(request: Request):
        try:
            data = await request.json()
        except Exception:
            return JSONResponse({"errors": ["body must be a JSON spec"]}, status_code=400)
        try:
            spec = spec_from_dict(data)
            spec = manager.resolve_dataset(spec)
        except SpecValidation as exc:
            return JSONResponse({"errors": exc.field_errors}, status_code=400)
        return {"job_id": manager.submit(spec)}

    @app.get("/api/jobs")
    def list_jobs():
        return {"jobs": [asdict(r) for r in manager.list_jobs()]}

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str):
        try:
            return asdict(manager.get(job_id))
        except UnknownJob:
            return JSONResponse({"errors": [f"unknown job {job_id!r}"]}, status_code=404)

    @app.get("/api/jobs/{job_id}/report")
    def job_report(job_id: str):
        try:
            return PlainTextResponse(manager.report_text(job_id))
        except UnknownJob as exc:
            return JSONResponse({"errors": [str(exc)]}, status_code=404)

    return app


def serve(workspace: str | Path, host: str = "127.0.0.1", port: int = 8000,
          max_workers: int = 2) -> None:
    import uvicorn

    uvicorn.run(create_app(workspace, max_workers), host=host, port=port)
