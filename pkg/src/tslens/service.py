"""HTTP analytics service.

Exposes datasets, pipeline runs, display payloads, selection mapping, and
cache/timing logs over JSON. Pipeline execution is asynchronous: POST
/pipeline registers a job keyed by a deterministic run id (a fingerprint of
the dataset artifact id, series name, and parameters), a worker thread runs
the stages through the shared reactive cache, and clients poll GET
/pipeline/{id}. Identical requests map to the same run id and never
recompute finished stages.

Endpoints:
    GET  /datasets                       list stored dataset artifacts
    POST /datasets                       multipart upload (CSV/TXT/TSF/columnar)
    POST /pipeline                       register a pipeline job
    GET  /pipeline/{id}                  poll job status / summary
    GET  /pipeline/{id}/display          capped series + projection payload
    POST /pipeline/{id}/selection        map points to time ranges and back
    GET  /logs                           cache stats + per-stage timing rows
    GET  /artifacts/{kind}/{name}/{version}/meta

Error mapping: unknown artifact or run id 404; invalid parameters or files
422; stage failures 500 with the failing stage named. Configuration comes
from flags or the environment (TSLENS_HOST, TSLENS_PORT, TSLENS_STORE_ROOT,
TSLENS_CACHE_BUDGET, TSLENS_DISPLAY_CAP).

GET /pipeline/{id}/display accepts an optional viewport (start/end sample
indices into the resampled series): the window is re-bucketed at full
resolution, so zooming reveals detail while staying under the display cap.
With "Accept: application/octet-stream" the projection is returned in the
binary columnar format with columns x, y, index, label.

The request field "threads" ("1" or "auto") is accepted for parity with the
UI contract; seeded runs execute sequentially either way so results stay
reproducible, and the field never enters cache keys.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, Request, Response, UploadFile
from pydantic import BaseModel, ConfigDict

from .artifacts import Artifact, ArtifactStore, NotFound
from .bench import StageTiming
from .cache import DEFAULT_BUDGET_BYTES, ComputeFailed, ReactiveCache
from .clustering import ClusterParams
from .columnar import Table, write_columnar
from .datasets import dataset_from_payload, pick_series
from .encoders import EncoderConfig
from .errors import InvalidInput, TsLensError
from .fingerprint import fingerprint
from .ingest import ParseError
from .pipeline import PipelineParams, PipelineResult, PipelineRunner
from .projection import ALGORITHMS, DRParams
from .series import DISPLAY_CAP_DEFAULT, TimeSeries

__all__ = ["create_app", "main"]

HOST_ENV = "TSLENS_HOST"
PORT_ENV = "TSLENS_PORT"
STORE_ROOT_ENV = "TSLENS_STORE_ROOT"
CACHE_BUDGET_ENV = "TSLENS_CACHE_BUDGET"
DISPLAY_CAP_ENV = "TSLENS_DISPLAY_CAP"

_NAME_SAFE = re.compile(r"[^A-Za-z0-9._-]+")


class EncoderModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    variant: str = "identity"
    pool: int = 1
    dims: int = 0
    seed: int = 0
    chunk_size: int = 8192


class DRModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    algorithm: str = "umap"
    n_neighbors: int = 15
    min_dist: float = 0.1
    random_state: int = 0
    pca_pre_dims: int = 50
    tsne_perplexity: float = 30.0


class ClusterModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    min_cluster_size: int = 5
    min_samples: Optional[int] = None


class PipelineRequestModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    dataset: str
    series: Optional[str] = None
    resample_factor: int = 1
    window: int = 48
    stride: int = 1
    encoder: EncoderModel = EncoderModel()
    dr: DRModel = DRModel()
    clustering: Optional[ClusterModel] = None
    threads: Literal["1", "auto"] = "1"


class SelectionModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    direction: Literal["points_to_time", "time_to_points"]
    indices: Optional[List[int]] = None
    start: Optional[int] = None
    end: Optional[int] = None


@dataclass
class _Job:
    run_id: str
    request: dict
    params: PipelineParams
    dataset_fingerprint: str
    loader: object
    status: str = "running"
    result: Optional[PipelineResult] = None
    stage: str = ""
    message: str = ""
    timings: List[StageTiming] = field(default_factory=list)


def _http_status(exc: BaseException) -> int:
    if isinstance(exc, NotFound):
        return 404
    if isinstance(exc, (InvalidInput, ParseError, IndexError)):
        return 422
    return 500


def _raise_http(exc: BaseException) -> None:
    raise HTTPException(status_code=_http_status(exc), detail=str(exc))


def _params_from_model(model: PipelineRequestModel, display_cap: int) -> PipelineParams:
    encoder = EncoderConfig(
        variant=model.encoder.variant,
        pool=model.encoder.pool,
        dims=model.encoder.dims,
        seed=model.encoder.seed,
        chunk_size=model.encoder.chunk_size,
    )
    if encoder.variant == "meanpool":
        encoder.output_dim(model.window, 1)  # pool must divide the window
    if model.dr.algorithm not in ALGORITHMS:
        raise InvalidInput(
            f"unknown projection {model.dr.algorithm!r}; expected one of {ALGORITHMS}"
        )
    dr = DRParams(
        algorithm=model.dr.algorithm,
        n_neighbors=model.dr.n_neighbors,
        min_dist=model.dr.min_dist,
        random_state=model.dr.random_state,
        pca_pre_dims=model.dr.pca_pre_dims,
        tsne_perplexity=model.dr.tsne_perplexity,
    )
    clustering = None
    if model.clustering is not None:
        clustering = ClusterParams(
            min_cluster_size=model.clustering.min_cluster_size,
            min_samples=model.clustering.min_samples,
        )
    return PipelineParams(
        resample_factor=model.resample_factor,
        window=model.window,
        stride=model.stride,
        encoder=encoder,
        dr=dr,
        clustering=clustering,
        display_cap=display_cap,
    )


def _artifact_json(artifact: Artifact) -> dict:
    return {
        "id": artifact.id,
        "kind": artifact.kind,
        "name": artifact.name,
        "version": artifact.version,
        "metadata": dict(artifact.metadata),
    }


def _derive_name(explicit: Optional[str], filename: str) -> str:
    if explicit:
        return explicit
    stem = filename.rsplit("/", 1)[-1]
    stem = stem.rsplit(".", 1)[0] if "." in stem else stem
    cleaned = _NAME_SAFE.sub("-", stem).strip("-._")
    return cleaned or "dataset"


def _timing_json(rows: Sequence[StageTiming]) -> List[dict]:
    return [
        {
            "factor": t.factor,
            "stage": t.stage,
            "elements": t.elements,
            "wall_seconds": t.wall_seconds,
            "compute_count": t.compute_count,
            "error": t.error,
        }
        for t in rows
    ]


def _json_values(values: np.ndarray) -> List[Optional[float]]:
    return [float(v) if np.isfinite(v) else None for v in values]


def _execute_job(state, job: _Job) -> None:
    cache: ReactiveCache = state.cache
    runner: PipelineRunner = state.runner
    params = job.params
    measured: List[Tuple[str, float, int, str]] = []
    elements = 0
    status = "error"

    def timed(stage, fn):
        before = cache.stats().per_stage[stage].compute_count
        t0 = time.monotonic()
        try:
            value = fn()
        except Exception as exc:
            wall = time.monotonic() - t0
            delta = cache.stats().per_stage[stage].compute_count - before
            measured.append((stage, wall, delta, str(exc)))
            raise
        wall = time.monotonic() - t0
        delta = cache.stats().per_stage[stage].compute_count - before
        measured.append((stage, wall, delta, ""))
        return value

    try:
        series, load_fp = timed(
            "load", lambda: runner.load(job.loader, job.dataset_fingerprint, params)
        )
        elements = series.n
        wm, windows_fp = timed(
            "windows", lambda: runner.windows(series, load_fp, params)
        )
        emb, embed_fp = timed("embed", lambda: runner.embed(wm, windows_fp, params))
        proj, project_fp = timed(
            "project", lambda: runner.project(emb, embed_fp, params)
        )
        fingerprints = {
            "load": load_fp,
            "windows": windows_fp,
            "embed": embed_fp,
            "project": project_fp,
        }
        clusters = None
        if params.clustering is not None:
            clusters, cluster_fp = timed(
                "cluster", lambda: runner.cluster(proj, project_fp, params)
            )
            fingerprints["cluster"] = cluster_fp
        job.result = PipelineResult(
            series=series,
            windows=wm,
            embedding=emb,
            projection=proj,
            clusters=clusters,
            fingerprints=fingerprints,
            params=params,
            dataset_fingerprint=job.dataset_fingerprint,
        )
        status = "done"
    except Exception as exc:
        status = "error"
        if isinstance(exc, ComputeFailed):
            job.stage = exc.stage
            job.message = str(exc.cause)
        else:
            job.stage = measured[-1][0] if measured else "load"
            job.message = str(exc)
    finally:
        job.timings = [
            StageTiming(params.resample_factor, stage, elements, wall, delta, err)
            for stage, wall, delta, err in measured
        ]
        with state.lock:
            state.timings.extend(job.timings)
        _write_run_log(state, job, status)
        # published last: pollers must not see a settled status before the
        # timings and the run-log artifact exist
        job.status = status


def _write_run_log(state, job: _Job, status: str) -> None:
    record = {
        "run_id": job.run_id,
        "status": status,
        "stage": job.stage,
        "message": job.message,
        "request": job.request,
        "timings": _timing_json(job.timings),
    }
    payload = json.dumps(record, sort_keys=True, indent=1).encode("utf-8")
    try:
        state.store.put_artifact("run-log", job.run_id, payload, {"status": status})
    except Exception:
        pass  # logging must never take down a run


def create_app(
    store_root: str = "tslens-store",
    cache_budget: int = DEFAULT_BUDGET_BYTES,
    display_cap: int = DISPLAY_CAP_DEFAULT,
    max_workers: int = 2,
) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        app.state.executor.shutdown(wait=False)

    app = FastAPI(title="tslens", lifespan=lifespan)
    app.state.store = ArtifactStore(store_root)
    app.state.cache = ReactiveCache(budget_bytes=cache_budget)
    app.state.runner = PipelineRunner(app.state.cache)
    app.state.display_cap = display_cap
    app.state.jobs: Dict[str, _Job] = {}
    app.state.timings: List[StageTiming] = []
    app.state.lock = threading.Lock()
    app.state.executor = ThreadPoolExecutor(max_workers=max_workers)
    state = app.state

    def get_job(run_id: str) -> _Job:
        with state.lock:
            job = state.jobs.get(run_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown run id {run_id!r}")
        return job

    def require_done(job: _Job) -> PipelineResult:
        if job.status == "running":
            raise HTTPException(
                status_code=409, detail={"run_id": job.run_id, "status": "running"}
            )
        if job.status == "error":
            raise HTTPException(
                status_code=500,
                detail={
                    "run_id": job.run_id,
                    "status": "error",
                    "stage": job.stage,
                    "message": job.message,
                },
            )
        return job.result

    @app.get("/datasets")
    def list_datasets():
        return [_artifact_json(a) for a in state.store.list_artifacts("dataset")]

    @app.post("/datasets")
    async def upload_dataset(
        file: UploadFile = File(...), name: Optional[str] = Form(None)
    ):
        payload = await file.read()
        filename = file.filename or "upload.csv"
        artifact_name = _derive_name(name, filename)
        metadata = {"filename": filename}
        try:
            parsed = dataset_from_payload(payload, metadata, default_name=artifact_name)
            first = parsed.series[0]
            metadata.update(
                {
                    "format": parsed.source_format,
                    "series_names": ",".join(parsed.series_names),
                    "rows": str(first.n),
                    "channels": str(first.channel_count),
                }
            )
            if first.frequency_seconds is not None:
                metadata["frequency_seconds"] = str(first.frequency_seconds)
            artifact = state.store.put_artifact("dataset", artifact_name, payload, metadata)
        except TsLensError as exc:
            _raise_http(exc)
        body = _artifact_json(artifact)
        body["series_names"] = list(parsed.series_names)
        return body

    @app.get("/artifacts/{kind}/{name}/{version}/meta")
    def artifact_meta(kind: str, name: str, version: int):
        try:
            return _artifact_json(state.store.get_meta(kind, name, version))
        except TsLensError as exc:
            _raise_http(exc)

    @app.post("/pipeline")
    def run_pipeline(request_model: PipelineRequestModel):
        name, _, version_text = request_model.dataset.partition("@")
        try:
            version = int(version_text) if version_text else None
        except ValueError:
            raise HTTPException(status_code=422, detail="artifact version must be an integer")
        try:
            meta = state.store.get_meta("dataset", name, version)
            params = _params_from_model(request_model, state.display_cap)
        except TsLensError as exc:
            _raise_http(exc)
        series_name = request_model.series
        dataset_fp = fingerprint({"artifact": meta.id, "series": series_name or ""})
        run_id = fingerprint({"dataset": dataset_fp, "params": params})[:16]

        def loader() -> TimeSeries:
            _, payload = state.store.get_artifact("dataset", meta.name, meta.version)
            parsed = dataset_from_payload(payload, meta.metadata, default_name=meta.name)
            return pick_series(parsed, series_name)

        with state.lock:
            job = state.jobs.get(run_id)
            if job is None:
                job = _Job(
                    run_id=run_id,
                    request=request_model.model_dump(),
                    params=params,
                    dataset_fingerprint=dataset_fp,
                    loader=loader,
                )
                state.jobs[run_id] = job
                state.executor.submit(_execute_job, state, job)
        return {"run_id": run_id, "status": job.status}

    @app.get("/pipeline/{run_id}")
    def poll_pipeline(run_id: str):
        job = get_job(run_id)
        if job.status == "running":
            return {"run_id": run_id, "status": "running", "request": job.request}
        if job.status == "error":
            require_done(job)  # raises the 500 with stage attribution
        result = job.result
        body = {
            "run_id": run_id,
            "status": "done",
            "request": job.request,
            "m": result.m,
            "elements": result.series.n,
            "window": result.params.window,
            "stride": result.params.stride,
            "fingerprints": result.fingerprints,
            "clustering": result.clusters is not None,
        }
        if result.clusters is not None:
            body["n_clusters"] = result.clusters.n_clusters
            body["silhouette"] = result.clusters.score
        return body

    @app.get("/pipeline/{run_id}/display")
    def get_display(
        run_id: str,
        request: Request,
        start: Optional[int] = None,
        end: Optional[int] = None,
    ):
        job = get_job(run_id)
        result = require_done(job)
        if (start is None) != (end is None):
            raise HTTPException(
                status_code=422, detail="viewport needs both start and end"
            )
        viewport = None if start is None else (start, end)
        t0 = time.monotonic()
        before = state.cache.stats().per_stage["display"].compute_count
        try:
            payload, _ = state.runner.display(result, viewport=viewport)
        except ComputeFailed as exc:
            raise HTTPException(
                status_code=_http_status(exc.cause),
                detail={"stage": "display", "message": str(exc.cause)},
            )
        except TsLensError as exc:
            _raise_http(exc)
        delta = state.cache.stats().per_stage["display"].compute_count - before
        row = StageTiming(
            result.params.resample_factor,
            "display",
            result.series.n,
            time.monotonic() - t0,
            delta,
        )
        with state.lock:
            state.timings.append(row)

        labels = payload.point_labels
        if "application/octet-stream" in request.headers.get("accept", ""):
            table = Table(
                (
                    ("x", np.ascontiguousarray(payload.projection_points[:, 0])),
                    ("y", np.ascontiguousarray(payload.projection_points[:, 1])),
                    ("index", payload.projection_indices.astype(np.int64)),
                    (
                        "label",
                        labels.astype(np.int64)
                        if labels is not None
                        else np.full(payload.projection_indices.size, -1, dtype=np.int64),
                    ),
                )
            )
            return Response(
                content=write_columnar(table), media_type="application/octet-stream"
            )
        return {
            "run_id": run_id,
            "viewport": None if viewport is None else list(viewport),
            "fingerprints": result.fingerprints,
            "series": {
                "cap": payload.series.cap,
                "source_length": payload.series.source_length,
                "channels": [
                    {
                        "name": ch.name,
                        "timestamps": ch.timestamps.tolist(),
                        "values": _json_values(ch.values),
                    }
                    for ch in payload.series.channels
                ],
            },
            "projection": {
                "total_points": payload.total_points,
                "indices": payload.projection_indices.tolist(),
                "points": payload.projection_points.tolist(),
                "labels": None if labels is None else labels.tolist(),
            },
        }

    @app.post("/pipeline/{run_id}/selection")
    def resolve_selection(run_id: str, selection: SelectionModel):
        job = get_job(run_id)
        result = require_done(job)
        w = result.params.window
        stride = result.params.stride
        m = result.m
        n = result.series.n
        if selection.direction == "points_to_time":
            if not selection.indices:
                return {"ranges": []}
            bad = [i for i in selection.indices if i < 0 or i >= m]
            if bad:
                raise HTTPException(
                    status_code=422, detail=f"point indices out of range: {bad[:5]}"
                )
            spans = sorted((i * stride, i * stride + w - 1) for i in set(selection.indices))
            merged = [list(spans[0])]
            for s, e in spans[1:]:
                if s <= merged[-1][1] + 1:
                    merged[-1][1] = max(merged[-1][1], e)
                else:
                    merged.append([s, e])
            return {"ranges": merged}
        if selection.start is None:
            raise HTTPException(status_code=422, detail="time selection needs start")
        t0 = selection.start
        t1 = selection.end if selection.end is not None else t0
        if not 0 <= t0 <= t1 < n:
            raise HTTPException(
                status_code=422, detail=f"time range [{t0}, {t1}] outside [0, {n})"
            )
        lo = max(0, -((-(t0 - w + 1)) // stride))
        hi = min(t1 // stride, m - 1)
        return {"indices": list(range(lo, hi + 1)) if hi >= lo else []}

    @app.get("/logs")
    def get_logs():
        stats = state.cache.stats()
        with state.lock:
            rows = list(state.timings)
        return {
            "cache": {
                "budget_bytes": state.cache.budget_bytes,
                "entries": len(state.cache),
                "stages": stats.as_rows(),
            },
            "runs": _timing_json(rows),
        }

    return app


def _env_int(name: str, default: int) -> int:
    text = os.environ.get(name)
    if text is None:
        return default
    try:
        return int(text)
    except ValueError:
        raise InvalidInput(f"{name} must be an integer, got {text!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="tslens-serve", description="Time-series analytics HTTP service."
    )
    parser.add_argument("--host", default=os.environ.get(HOST_ENV, "127.0.0.1"))
    parser.add_argument("--port", type=int, default=None)
    parser.add_argument("--store-root", default=None)
    parser.add_argument("--cache-budget", type=int, default=None)
    parser.add_argument("--display-cap", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        port = args.port if args.port is not None else _env_int(PORT_ENV, 8000)
        store_root = args.store_root or os.environ.get(STORE_ROOT_ENV, "tslens-store")
        budget = (
            args.cache_budget
            if args.cache_budget is not None
            else _env_int(CACHE_BUDGET_ENV, DEFAULT_BUDGET_BYTES)
        )
        cap = (
            args.display_cap
            if args.display_cap is not None
            else _env_int(DISPLAY_CAP_ENV, DISPLAY_CAP_DEFAULT)
        )
        app = create_app(store_root=store_root, cache_budget=budget, display_cap=cap)
    except TsLensError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    import uvicorn

    uvicorn.run(app, host=args.host, port=port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
