"""HTTP control API consumed by the review console: JSON over HTTP, one
endpoint per operator action, long-poll event stream for live progress."""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .domain import FEEDBACK_RATINGS
from .errors import (
    QuerySyntaxError,
    RunFinalized,
    SlrError,
    StageFailed,
    UnknownDecision,
    UnknownRating,
    UnknownRun,
    ValidationError,
)

SCHEMA_VERSION = "1"
MAX_BODY_BYTES = 1 << 20


def _payload(data: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, **data}


def create_app(orchestrator, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="slrpipe control API")

    @app.middleware("http")
    async def limit_body(request: Request, call_next):
        length = request.headers.get("content-length")
        if length is not None and int(length) > MAX_BODY_BYTES:
            return JSONResponse(
                _payload({"error": "request body exceeds 1 MiB"}), status_code=413
            )
        return await call_next(request)

    @app.exception_handler(SlrError)
    async def slr_error(request: Request, exc: SlrError):
        status = 500
        body = {"error": str(exc)}
        if isinstance(exc, UnknownRun) or isinstance(exc, UnknownDecision):
            status = 404
        elif isinstance(exc, RunFinalized):
            status = 409
        elif isinstance(exc, QuerySyntaxError):
            status = 422
            body["offset"] = exc.offset
            body["expected"] = sorted(exc.expected)
        elif isinstance(exc, (ValidationError, UnknownRating)):
            status = 422
        elif isinstance(exc, StageFailed):
            status = 500
            body["stage"] = exc.stage
        return JSONResponse(_payload(body), status_code=status)

    # -- runs -------------------------------------------------------------

    @app.post("/api/runs", status_code=201)
    async def create_run(request: Request):
        from .domain import ReviewProtocol

        data = await request.json()
        protocol = ReviewProtocol.from_dict(data)
        run_id = orchestrator.create_run(protocol)
        return _payload({"run_id": run_id})

    @app.get("/api/runs")
    async def list_runs():
        runs = []
        for run_id in orchestrator.list_runs():
            state = orchestrator.state(run_id)
            runs.append(
                {"run_id": run_id, "stage": state["stage"], "status": state["status"]}
            )
        return _payload({"runs": runs})

    @app.get("/api/runs/{run_id}")
    async def get_run(run_id: str):
        return _payload(orchestrator.state(run_id))

    @app.post("/api/runs/{run_id}/advance")
    async def advance(run_id: str):
        return _payload(orchestrator.advance(run_id))

    @app.patch("/api/runs/{run_id}/protocol")
    async def edit_protocol(run_id: str, request: Request):
        data = await request.json()
        updated = orchestrator.edit_protocol(
            run_id, data["field"], data["value"], data.get("editor", "")
        )
        return _payload({"protocol": updated})

    # -- run artifacts ----------------------------------------------------

    @app.get("/api/runs/{run_id}/candidates")
    async def candidates(run_id: str):
        store = orchestrator.store(run_id)
        rows, _ = store.read_jsonl("candidates.jsonl")
        return _payload({"candidates": rows})

    @app.get("/api/runs/{run_id}/decisions")
    async def decisions(run_id: str):
        store = orchestrator.store(run_id)
        rows, _ = store.read_jsonl("decisions.jsonl")
        return _payload({"decisions": rows})

    @app.post("/api/runs/{run_id}/decisions/{decision_id}/override")
    async def override(run_id: str, decision_id: str, request: Request):
        data = await request.json()
        decision = orchestrator.apply_override(
            run_id,
            decision_id,
            data["verdict"],
            data.get("rationale", ""),
            data.get("editor", ""),
        )
        return _payload({"decision": decision})

    @app.get("/api/runs/{run_id}/report")
    async def report(run_id: str):
        store = orchestrator.store(run_id)
        path = store.path("report.md")
        if not path.exists():
            return JSONResponse(
                _payload({"error": "report not generated yet"}), status_code=409
            )
        return PlainTextResponse(
            path.read_text(encoding="utf-8"),
            media_type="text/markdown",
            headers={"X-Schema-Version": SCHEMA_VERSION},
        )

    @app.post("/api/runs/{run_id}/feedback", status_code=201)
    async def feedback(run_id: str, request: Request):
        data = await request.json()
        entry = orchestrator.record_feedback(
            run_id, data.get("rating", ""), data.get("comment", ""), data.get("role", "")
        )
        return _payload({"feedback": entry})

    @app.get("/api/feedback/ratings")
    async def ratings():
        return _payload({"ratings": list(FEEDBACK_RATINGS)})

    # -- events (long poll) ----------------------------------------------

    @app.get("/api/events/{run_id}")
    async def events(run_id: str, cursor: int = 0, timeout: float = 10.0):
        store = orchestrator.store(run_id)
        deadline = asyncio.get_event_loop().time() + min(timeout, 60.0)
        while True:
            new = store.read_events(since=cursor)
            if new or asyncio.get_event_loop().time() >= deadline:
                next_cursor = new[-1]["seq"] if new else cursor
                return _payload({"events": new, "cursor": next_cursor})
            await asyncio.sleep(0.05)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
