"""HTTP JSON API over a workspace, mirroring the CLI semantics.

GET endpoints are side-effect-free reads of committed workspace state.
Training is the only mutation and runs single-flight: a second POST
/api/train while one is active returns 409. Assessment responses reuse the
canonical RiskReport serialization, so HTTP bodies match CLI-written files
byte-for-byte.
"""

from __future__ import annotations

import threading
import time
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import models, risk
from .graph import UnknownNodeError, graph_stats
from .workspace import GraphCheckpointMismatch, Workspace, WorkspaceError


class AssessRequest(BaseModel):
    lost: list[str] = Field(min_length=1)
    threshold: float = 0.0
    model: str = "featuregcn"


class TrainRequest(BaseModel):
    model: str
    epochs: int = 50
    lr: float = 0.01
    hidden: int = 64
    seed: int = 0
    split_seed: int = 0
    optimizer: str = "adam"


class TrainManager:
    """Single-flight training runner; the lock itself is the 409 gate."""

    def __init__(self, ws: Workspace):
        self._ws = ws
        self._lock = threading.Lock()
        self._state: dict = {"running": False, "model": None, "result": None, "error": None}

    def status(self) -> dict:
        return dict(self._state)

    def start(self, config: models.ModelConfig, split_seed: int) -> bool:
        if not self._lock.acquire(blocking=False):
            return False
        self._state = {
            "running": True,
            "model": config.kind,
            "started_at": time.time(),
            "result": None,
            "error": None,
        }

        def run() -> None:
            try:
                report = self._ws.train(config, split_seed=split_seed)
                self._state = {
                    "running": False,
                    "model": config.kind,
                    "result": report.to_json_obj(),
                    "error": None,
                }
            except Exception as exc:  # surfaced via the status endpoint
                self._state = {
                    "running": False,
                    "model": config.kind,
                    "result": None,
                    "error": str(exc),
                }
            finally:
                self._lock.release()

        threading.Thread(target=run, daemon=True).start()
        return True


def _error(status_code: int, message: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status_code, content={"error": message, **extra})


def create_app(workspace_root: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    ws = Workspace(workspace_root)
    trainer = TrainManager(ws)
    app = FastAPI(title="idrisk service", version="0.1.0")

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return _error(400, "malformed request body", detail=exc.errors())

    @app.get("/api/attributes")
    def attributes():
        try:
            return {"attributes": ws.graph().node_names}
        except WorkspaceError as exc:
            return _error(422, str(exc))

    @app.get("/api/graph/stats")
    def stats():
        try:
            return graph_stats(ws.graph())
        except WorkspaceError as exc:
            return _error(422, str(exc))

    @app.get("/api/graph/edges")
    def edges(node: str):
        try:
            g = ws.graph()
            u = g.node_id(node)
        except WorkspaceError as exc:
            return _error(422, str(exc))
        except UnknownNodeError as exc:
            return _error(404, str(exc), suggestions=exc.suggestions)
        out_w = g.out_weight(u)
        return {
            "node": node,
            "out": [
                {"target": g.node_name(v), "weight": w, "p": w / out_w}
                for v, w in g.out_edges(u)
            ],
            "in": [{"source": g.node_name(s), "weight": w} for s, w in g.in_edges(u)],
        }

    @app.post("/api/train", status_code=202)
    def train(body: TrainRequest):
        try:
            config = models.ModelConfig(
                kind=body.model,
                hidden_dim=body.hidden,
                epochs=body.epochs,
                lr=body.lr,
                seed=body.seed,
                optimizer=body.optimizer,
            )
        except ValueError as exc:
            return _error(400, str(exc))
        try:
            ws.graph()
        except WorkspaceError as exc:
            return _error(422, str(exc))
        if not trainer.start(config, body.split_seed):
            return _error(409, "a training run is already in progress")
        return {"status": "started", "model": config.kind}

    @app.get("/api/train/status")
    def train_status():
        return trainer.status()

    @app.post("/api/assess")
    def assess(body: AssessRequest):
        try:
            query = risk.RiskQuery(
                lost_attributes=tuple(body.lost),
                threshold=body.threshold,
                model_kind=body.model,
            )
        except ValueError as exc:
            return _error(400, str(exc))
        try:
            report = ws.assess(query)
        except UnknownNodeError as exc:
            return _error(404, str(exc), suggestions=exc.suggestions)
        except GraphCheckpointMismatch as exc:
            return _error(422, str(exc))
        except WorkspaceError as exc:
            return _error(422, str(exc))
        return Response(content=report.to_json_bytes(), media_type="application/json")

    @app.get("/api/report")
    def report():
        return ws.report_matrix()

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
