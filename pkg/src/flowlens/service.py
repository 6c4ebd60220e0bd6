"""Read-only HTTP/JSON API over an immutable snapshot.

Every endpoint is a pure projection of a library call; the only mutation is
POST /api/admin/reload, which re-ingests the snapshot file and swaps the new
snapshot in atomically.  In-flight requests keep reading the snapshot they
started with.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Callable

from fastapi import Body, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import serialize
from .errors import FlowlensError
from .ingest import DatasetSnapshot, load_snapshot

#: Error codes answered with 404 (unknown keys) and 422 (not enough data);
#: every other package error is a 400-level input problem.
_NOT_FOUND = {"UnknownCategory", "UnknownFeature", "UnknownRun"}
_UNPROCESSABLE = {"InsufficientData"}


def _status_for(error: FlowlensError) -> int:
    if error.code in _NOT_FOUND:
        return 404
    if error.code in _UNPROCESSABLE:
        return 422
    return 400


def _detail_for(error: FlowlensError):
    if hasattr(error, "problems"):
        return {"problems": error.problems}
    if hasattr(error, "line_number"):
        return {"line": error.line_number}
    if hasattr(error, "item_id"):
        return {"item_id": error.item_id}
    return None


class SnapshotHolder:
    """Holds the current snapshot; `reload` swaps it atomically."""

    def __init__(self, loader: Callable[[], DatasetSnapshot]):
        self._loader = loader
        self._snapshot = loader()

    @property
    def current(self) -> DatasetSnapshot:
        return self._snapshot

    def reload(self) -> DatasetSnapshot:
        snapshot = self._loader()  # build completely before publishing
        self._snapshot = snapshot
        return snapshot


def _csv(value: str | None) -> list[str] | None:
    if not value:
        return None
    return [part for part in (p.strip() for p in value.split(",")) if part]


def create_app(
    snapshot_path: str | Path | None = None,
    snapshot: DatasetSnapshot | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    """Build the service; supply a snapshot file path or an in-memory snapshot."""
    if snapshot is not None:
        loader: Callable[[], DatasetSnapshot] = lambda: snapshot
    elif snapshot_path is not None:
        loader = lambda: load_snapshot(snapshot_path)
    else:
        raise ValueError("create_app needs snapshot_path or snapshot")

    holder = SnapshotHolder(loader)
    app = FastAPI(title="flowlens", docs_url=None, redoc_url=None)
    app.state.holder = holder

    @app.exception_handler(FlowlensError)
    async def _package_error(_request: Request, exc: FlowlensError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={"code": exc.code, "message": str(exc), "detail": _detail_for(exc)},
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={
                "code": "InvalidParameter",
                "message": "invalid request parameter",
                "detail": exc.errors(),
            },
        )

    @app.get("/api/taxonomy")
    def taxonomy():
        return serialize.taxonomy_payload(holder.current)

    @app.get("/api/nodes/{node_id}/quantity")
    def quantity(node_id: str, beta: float = Query(default=0.5)):
        return serialize.quantity_payload(holder.current, node_id, beta=beta)

    @app.get("/api/nodes/{node_id}/quality")
    def quality(node_id: str, trust: float = Query(default=0.5)):
        return serialize.quality_payload(holder.current, node_id, trust=trust)

    @app.get("/api/nodes/{node_id}/multilevel")
    def multilevel(node_id: str, depth: int = Query(default=2, ge=1)):
        return serialize.multilevel_payload(holder.current, node_id, depth=depth)

    @app.get("/api/features")
    def features():
        return serialize.features_payload(holder.current)

    @app.get("/api/features/{name}/flow")
    def feature_flow(name: str):
        return serialize.feature_flow_payload(holder.current, name)

    @app.get("/api/features/{name}/importance")
    def feature_importance(name: str):
        return serialize.importance_payload(holder.current, name)

    @app.get("/api/features/{name}/welch")
    def feature_welch(name: str, a: str = Query(), b: str = Query()):
        return serialize.welch_payload(holder.current, name, a, b)

    @app.get("/api/features/{name}/violin")
    def feature_violin(
        name: str,
        category: str = Query(),
        grid: int = Query(default=64, ge=2, alias="grid"),
    ):
        return serialize.violin_payload(holder.current, name, category, grid_points=grid)

    @app.get("/api/runs")
    def runs():
        return serialize.runs_payload(holder.current)

    @app.get("/api/runs/{run_id}/accuracy")
    def run_accuracy(run_id: str):
        return serialize.accuracy_payload(holder.current, run_id)

    @app.get("/api/runs/{run_id}/misclassification")
    def run_misclassification(run_id: str):
        return serialize.misclassification_payload(holder.current, run_id)

    @app.get("/api/runs/{run_id}/diagnose")
    def run_diagnose(
        run_id: str,
        min_flow: int = Query(default=5, ge=1, alias="minFlow"),
        fanin: int = Query(default=3, ge=2),
    ):
        return serialize.diagnose_payload(
            holder.current, run_id, min_flow=min_flow, broad_fanin=fanin
        )

    @app.get("/api/flows/model-diff")
    def model_diff(
        runs: str | None = Query(default=None),
        min_share: float = Query(default=0.005, alias="minShare"),
    ):
        return serialize.model_diff_payload(
            holder.current, _csv(runs), min_share=min_share
        )

    @app.get("/api/trends")
    def trends(
        runs: str | None = Query(default=None),
        epsilon: float = Query(default=0.005),
    ):
        return serialize.trends_payload(holder.current, _csv(runs), epsilon=epsilon)

    @app.post("/api/layout/sankey")
    def layout_sankey(body: dict = Body()):
        return serialize.layout_request_payload(body)

    @app.post("/api/admin/reload")
    def reload_snapshot():
        snapshot = holder.reload()
        return {"reloaded": True, "created_at": snapshot.created_at, "stats": snapshot.stats()}

    static = static_dir or os.environ.get("FLOWLENS_STATIC")
    if static and Path(static).is_dir():
        app.mount("/", StaticFiles(directory=static, html=True), name="ui")

    return app
