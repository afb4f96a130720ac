"""HTTP service: sessions, frames, intent, transforms and streamed dashboards.

Recommendations stream over server-sent events, one ``recommendation`` event
per completed action and a terminal ``done`` event; a long-poll endpoint
covers clients without SSE support. All responses are UTF-8 JSON.
"""

from __future__ import annotations

import json
from typing import Optional

from fastapi import FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse, StreamingResponse

from .errors import (
    CsvFormatError,
    IntentParseError,
    IntentValidationError,
    TransformError,
    UnknownColumnError,
)
from .frame import LoadOptions, apply_transform, load_csv, transform_from_dict
from .intent import parse_intent, validate_intent
from .metadata import compute_metadata
from .optimize import EngineConfig
from .session import SessionStore

POLL_WAIT_CAP = 30.0


def create_app(config: Optional[EngineConfig] = None, frame_cap: int = 32) -> FastAPI:
    app = FastAPI(title="luxen", version="0.1.0")
    store = SessionStore(config or EngineConfig.from_env(), frame_cap=frame_cap)
    app.state.store = store

    def not_found(what: str):
        return JSONResponse({"error": f"unknown {what}"}, status_code=404)

    def frame_or_error(fid: str):
        session, frame = store.locate_frame(fid)
        if session is None:
            return None, None, not_found("frame id")
        if frame is None:
            if session.was_evicted(fid):
                return None, None, JSONResponse(
                    {"error": "frame was evicted from the session"}, status_code=409
                )
            return None, None, not_found("frame id")
        return session, frame, None

    @app.post("/sessions")
    def create_session():
        session = store.create_session()
        return {"session_id": session.id}

    @app.post("/sessions/{sid}/frames")
    async def upload_frame(
        sid: str,
        request: Request,
        name: str = Query("frame"),
        delimiter: str = Query(","),
        header: bool = Query(True),
    ):
        session = store.get_session(sid)
        if session is None:
            return not_found("session id")
        body = await request.body()
        try:
            frame = load_csv(
                body, LoadOptions(delimiter=delimiter, header=header), name=name
            )
        except CsvFormatError as e:
            return JSONResponse({"error": str(e)}, status_code=400)
        fid = store.register_frame(session, frame)
        return {
            "frame_id": fid,
            "rows": frame.row_count,
            "columns": frame.column_names,
            "version": frame.version,
        }

    @app.get("/frames/{fid}/table")
    def table_page(fid: str, offset: int = Query(0, ge=0), limit: int = Query(50, ge=1, le=1000)):
        _, frame, err = frame_or_error(fid)
        if err is not None:
            return err
        end = min(offset + limit, frame.row_count)
        rows = [
            [col.cell(i) for col in frame.columns] for i in range(offset, end)
        ]
        return {
            "frame_id": fid,
            "version": frame.version,
            "total_rows": frame.row_count,
            "offset": offset,
            "columns": [
                {"name": c.name, "storage_type": c.storage_type} for c in frame.columns
            ],
            "row_labels": [str(l) for l in frame.row_labels[offset:end]],
            "rows": rows,
        }

    @app.put("/frames/{fid}/intent")
    def set_intent(fid: str, payload: dict):
        session, frame, err = frame_or_error(fid)
        if err is not None:
            return err
        clauses = payload.get("clauses", [])
        with session.frame_lock(fid):
            if not clauses:
                frame.set_intent(None)
                return {"cleared": True, "warnings": [], "intent_version": frame.intent_version}
            try:
                intent = parse_intent(clauses)
                metas = compute_metadata(frame)
                _, warnings = validate_intent(intent, metas)
            except (IntentParseError, IntentValidationError) as e:
                detail = {"error": str(e)}
                if isinstance(e, IntentParseError) and e.position is not None:
                    detail["position"] = e.position
                return JSONResponse(detail, status_code=400)
            frame.set_intent(intent)
            return {
                "cleared": False,
                "warnings": [w.to_dict() for w in warnings],
                "intent_version": frame.intent_version,
            }

    @app.post("/frames/{fid}/transform")
    def transform(fid: str, payload: dict):
        session, frame, err = frame_or_error(fid)
        if err is not None:
            return err
        with session.frame_lock(fid):
            try:
                op = transform_from_dict(payload)
                child = apply_transform(frame, op)
            except (TransformError, UnknownColumnError) as e:
                return JSONResponse({"error": str(e)}, status_code=400)
        new_fid = store.register_frame(session, child)
        return {
            "frame_id": new_fid,
            "parent_id": fid,
            "rows": child.row_count,
            "columns": child.column_names,
            "version": child.version,
        }

    @app.get("/frames/{fid}/recommendations")
    def recommendations_stream(fid: str, k: Optional[int] = Query(None, ge=1)):
        session, frame, err = frame_or_error(fid)
        if err is not None:
            return err
        run = session.get_or_start_run(fid, frame, k or session.engine.config.top_k)

        def sse():
            cursor = 0
            while True:
                events, done = run.wait_events(cursor, timeout=POLL_WAIT_CAP)
                for e in events:
                    data = json.dumps(e["data"], ensure_ascii=False)
                    yield f"event: {e['event']}\ndata: {data}\n\n"
                cursor += len(events)
                if done and cursor >= len(run.events):
                    break

        return StreamingResponse(sse(), media_type="text/event-stream")

    @app.get("/frames/{fid}/recommendations/poll")
    def recommendations_poll(
        fid: str,
        k: Optional[int] = Query(None, ge=1),
        after: int = Query(0, ge=0),
        wait: float = Query(0.0, ge=0.0, le=POLL_WAIT_CAP),
    ):
        """Long-poll fallback: events after a cursor, waiting up to ``wait`` s."""
        session, frame, err = frame_or_error(fid)
        if err is not None:
            return err
        run = session.get_or_start_run(fid, frame, k or session.engine.config.top_k)
        events, done = run.wait_events(after, timeout=wait)
        return {"events": events, "next": after + len(events), "done": done}

    @app.get("/frames/{fid}/vis/{vis_id}/spec")
    def vis_spec(fid: str, vis_id: str):
        session, frame, err = frame_or_error(fid)
        if err is not None:
            return err
        run = session.current_run(fid)
        if run is None:
            return not_found("visualization (no recommendations computed)")
        if run.key[0] != frame.version or run.key[1] != frame.intent_version:
            return JSONResponse(
                {"error": "stale vis id: the frame changed since rendering"},
                status_code=409,
            )
        doc = run.vis_docs.get(vis_id)
        if doc is None:
            return not_found("vis id")
        return Response(content=doc, media_type="application/json")

    @app.get("/config")
    def get_config():
        c = store.config
        return {
            "sample_cap": c.sample_cap,
            "top_k": c.top_k,
            "prune_margin": c.prune_margin,
            "parallelism": c.effective_parallelism(),
            "prune": c.prune,
            "async_scheduling": c.async_scheduling,
            "memoize": c.memoize,
        }

    return app


def serve_endpoints(config: Optional[EngineConfig] = None, host: str = "127.0.0.1", port: int = 8787):
    """Run the HTTP service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=port, log_level="info")
