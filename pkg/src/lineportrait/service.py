"""HTTP face of the pipeline: live edge previews plus a portrait job queue.

Previews are stateless and run concurrently. Generation jobs go through a
queue consumed by a single worker thread, mirroring the single physical
plotter at the other end. Each job owns a directory under the data root
where every artifact and the job record live; the gallery is nothing more
than a directory scan, so the service survives restarts with its history
intact.
"""

from __future__ import annotations

import json
import queue
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import FileResponse, Response
from fastapi.staticfiles import StaticFiles
from starlette.concurrency import run_in_threadpool

from .exceptions import ImageDecodeError, StageError
from .pipeline import PipelineConfig, load_model_file, run_pipeline
from .raster import canny, edge_map_to_png, load_image, to_grayscale

_STATE_ORDER = {"queued": 0, "running": 1, "done": 2, "failed": 2}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class JobStore:
    """Thread-safe job records backed by one job.json per job directory."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._jobs: dict[str, dict] = {}
        for record_path in sorted(self.root.glob("*/job.json")):
            try:
                record = json.loads(record_path.read_text(encoding="utf-8"))
            except (OSError, ValueError):
                continue
            if isinstance(record, dict) and "id" in record:
                # A job interrupted by a restart can never finish.
                if record.get("state") in ("queued", "running"):
                    record["state"] = "failed"
                    record["error"] = "service restarted before the job finished"
                self._jobs[record["id"]] = record

    def job_dir(self, job_id: str) -> Path:
        return self.root / job_id

    def _persist(self, record: dict) -> None:
        job_dir = self.job_dir(record["id"])
        job_dir.mkdir(parents=True, exist_ok=True)
        tmp = job_dir / "job.json.tmp"
        tmp.write_text(json.dumps(record, indent=2), encoding="utf-8")
        tmp.replace(job_dir / "job.json")

    def create(self, config: dict) -> dict:
        record = {
            "id": uuid.uuid4().hex[:12],
            "state": "queued",
            "stage": None,
            "error": None,
            "config": config,
            "stats": None,
            "created": _now(),
            "updated": _now(),
        }
        with self._lock:
            self._jobs[record["id"]] = record
            self._persist(record)
        return dict(record)

    def get(self, job_id: str) -> dict | None:
        with self._lock:
            record = self._jobs.get(job_id)
            return dict(record) if record else None

    def list(self) -> list[dict]:
        with self._lock:
            records = [dict(r) for r in self._jobs.values()]
        return sorted(records, key=lambda r: r["created"], reverse=True)

    def update(self, job_id: str, **fields) -> None:
        with self._lock:
            record = self._jobs.get(job_id)
            if record is None:
                return
            new_state = fields.get("state")
            if new_state is not None:
                # Forward-only: queued -> running -> done|failed.
                if _STATE_ORDER[new_state] < _STATE_ORDER[record["state"]]:
                    return
                if record["state"] in ("done", "failed"):
                    return
            record.update(fields)
            record["updated"] = _now()
            self._persist(record)


def _decode_or_400(data: bytes):
    if not data:
        raise HTTPException(status_code=400, detail="empty image upload")
    try:
        return load_image(data)
    except ImageDecodeError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


async def _read_image_upload(request: Request) -> bytes:
    """The uploaded image bytes, from a multipart field or the raw body."""
    content_type = request.headers.get("content-type", "")
    if content_type.startswith("multipart/"):
        form = await request.form()
        upload = form.get("image") or form.get("file")
        if upload is None or isinstance(upload, str):
            raise HTTPException(status_code=400, detail="missing image field")
        return await upload.read()
    return await request.body()


def create_app(
    model_path: str | Path | None = None,
    data_dir: str | Path = "portraits",
    frontend_dir: str | Path | None = None,
) -> FastAPI:
    model = None
    templates: list = []
    if model_path is not None:
        model, templates = load_model_file(model_path)

    store = JobStore(Path(data_dir))
    jobs: queue.Queue = queue.Queue()

    def run_job(job_id: str) -> None:
        record = store.get(job_id)
        if record is None:
            return
        job_dir = store.job_dir(job_id)
        try:
            image_bytes = (job_dir / "input.bin").read_bytes()
            cfg = replace(
                PipelineConfig.from_dict(record["config"]),
                out_dir=str(job_dir),
                model_path=None,
            )
            store.update(job_id, state="running")
            result = run_pipeline(
                image_bytes,
                cfg,
                model=model,
                templates=templates,
                on_stage=lambda stage: store.update(job_id, state="running", stage=stage),
            )
            store.update(job_id, state="done", stage=None, stats=result.stats.as_dict())
        except StageError as exc:
            store.update(job_id, state="failed", stage=exc.stage, error=str(exc))
        except Exception as exc:
            store.update(job_id, state="failed", error=str(exc))

    def worker() -> None:
        while True:
            job_id = jobs.get()
            if job_id is None:
                return
            run_job(job_id)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        thread = threading.Thread(target=worker, name="portrait-worker", daemon=True)
        thread.start()
        yield
        jobs.put(None)
        thread.join(timeout=5.0)

    app = FastAPI(title="line portrait service", lifespan=lifespan)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/preview")
    async def preview(
        request: Request,
        kernel_size: int = 5,
        low_threshold: float = 0.10,
        high_threshold: float = 0.30,
    ):
        data = await _read_image_upload(request)

        def compute() -> bytes:
            img = _decode_or_400(data)
            try:
                edges = canny(
                    to_grayscale(img),
                    kernel_size=kernel_size,
                    low_threshold=low_threshold,
                    high_threshold=high_threshold,
                )
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            return edge_map_to_png(edges)

        png = await run_in_threadpool(compute)
        return Response(content=png, media_type="image/png")

    @app.post("/portraits", status_code=202)
    async def submit_portrait(request: Request):
        content_type = request.headers.get("content-type", "")
        overrides: dict = {}
        if content_type.startswith("multipart/"):
            form = await request.form()
            upload = form.get("image") or form.get("file")
            if upload is None or isinstance(upload, str):
                raise HTTPException(status_code=400, detail="missing image field")
            data = await upload.read()
            raw_config = form.get("config")
            if raw_config:
                try:
                    overrides = json.loads(raw_config)
                except ValueError as exc:
                    raise HTTPException(status_code=400, detail=f"bad config JSON: {exc}")
        else:
            data = await request.body()

        _decode_or_400(data)
        try:
            PipelineConfig.from_dict(overrides)
        except (TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"bad config: {exc}")

        record = store.create(overrides)
        job_dir = store.job_dir(record["id"])
        job_dir.mkdir(parents=True, exist_ok=True)
        (job_dir / "input.bin").write_bytes(data)
        jobs.put(record["id"])
        return {"id": record["id"], "state": record["state"]}

    @app.get("/portraits")
    def list_portraits():
        return {"portraits": store.list()}

    @app.get("/portraits/{job_id}")
    def get_portrait(job_id: str):
        record = store.get(job_id)
        if record is None:
            raise HTTPException(status_code=404, detail="unknown portrait id")
        return record

    @app.get("/portraits/{job_id}/svg")
    def get_portrait_svg(job_id: str):
        record = store.get(job_id)
        if record is None:
            raise HTTPException(status_code=404, detail="unknown portrait id")
        svg_path = store.job_dir(job_id) / "plan.svg"
        if record["state"] != "done" or not svg_path.exists():
            raise HTTPException(status_code=404, detail="portrait not finished")
        return FileResponse(svg_path, media_type="image/svg+xml")

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app
