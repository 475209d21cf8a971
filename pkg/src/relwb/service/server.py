"""Local HTTP and WebSocket API over the session layer.

All payloads are JSON. Instances travel as {sigs, fields} objects plus a
rendered text form; suggestions as {text, type, value} triples; breakdown
reports carry source spans so a client can highlight model text. The
WebSocket stream pushes the session event log live, generation-tagged.
"""
from __future__ import annotations

import queue
from typing import Optional

import anyio
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel

from ..errors import (
    NoPrefixContext,
    SessionNotFound,
    StructuralMismatch,
    VacuousPrefix,
)
from ..instance import from_json
from .session import CATEGORIES, SessionConfig, Workbench


class OpenSessionBody(BaseModel):
    text: str
    scope: Optional[dict] = None
    debounceMs: Optional[float] = None
    solveDelayMs: Optional[float] = None
    budgetBits: Optional[int] = None


class EditBody(BaseModel):
    text: str


class PinBody(BaseModel):
    instance: dict
    expected: str


class VisibleBody(BaseModel):
    categories: list[str]


def create_app(workbench: Optional[Workbench] = None) -> FastAPI:
    app = FastAPI(title="relwb", version="0.1.0")
    wb = workbench if workbench is not None else Workbench()
    app.state.workbench = wb

    def session_of(sid: str):
        try:
            return wb.get(sid)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.post("/sessions")
    def open_session(body: OpenSessionBody):
        config_data = {
            k: v
            for k, v in {
                "scope": body.scope,
                "debounceMs": body.debounceMs,
                "solveDelayMs": body.solveDelayMs,
                "budgetBits": body.budgetBits,
            }.items()
            if v is not None
        }
        session = wb.open(body.text, SessionConfig.from_wire(config_data))
        return session.to_wire()

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        return session_of(sid).to_wire()

    @app.delete("/sessions/{sid}")
    def close_session(sid: str):
        try:
            wb.close(sid)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"closed": sid}

    @app.post("/sessions/{sid}/edit")
    def apply_edit(sid: str, body: EditBody):
        session = session_of(sid)
        generation, diags = session.apply_edit(body.text)
        return {
            "generation": generation,
            "diagnostics": [d.to_wire() for d in diags],
        }

    @app.post("/sessions/{sid}/wait")
    def wait_idle(sid: str, timeout: float = 30.0):
        session = session_of(sid)
        return {"idle": session.wait_idle(timeout)}

    @app.get("/sessions/{sid}/categories/{key}")
    def get_category(sid: str, key: str):
        session = session_of(sid)
        if key not in CATEGORIES:
            raise HTTPException(status_code=404, detail=f"no category '{key}'")
        return session.get_category_view(key)

    @app.post("/sessions/{sid}/categories/{key}/advance")
    def advance_category(sid: str, key: str):
        session = session_of(sid)
        if key not in CATEGORIES:
            raise HTTPException(status_code=404, detail=f"no category '{key}'")
        return session.advance_category(key)

    @app.post("/sessions/{sid}/visible")
    def set_visible(sid: str, body: VisibleBody):
        session = session_of(sid)
        session.set_visible(body.categories)
        return {"visible": sorted(session.visible)}

    @app.get("/sessions/{sid}/focus")
    def get_focus(sid: str):
        return {"entries": session_of(sid).get_focus()}

    @app.post("/sessions/{sid}/focus")
    def pin_focus(sid: str, body: PinBody):
        session = session_of(sid)
        universe = session.universe()
        if universe is None:
            raise HTTPException(
                status_code=409, detail="the model has not compiled yet"
            )
        try:
            inst = from_json(session.last_good, universe, body.instance)
            entries = session.pin_focus(inst, body.expected)
        except StructuralMismatch as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"entries": entries}

    @app.delete("/sessions/{sid}/focus/{index}")
    def unpin_focus(sid: str, index: int):
        session = session_of(sid)
        try:
            session.unpin_focus(index)
        except IndexError:
            raise HTTPException(status_code=404, detail=f"no focus entry {index}")
        return {"entries": session.get_focus()}

    @app.get("/sessions/{sid}/suggestions")
    def get_suggestions(sid: str, offset: int, source: Optional[str] = None):
        session = session_of(sid)
        try:
            result = session.get_suggestions(offset, source)
        except (NoPrefixContext, VacuousPrefix) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        universe = session.universe()
        return {
            "suggestions": [s.to_wire(universe) for s in result.suggestions],
            "truncated": result.truncated,
        }

    @app.get("/sessions/{sid}/events")
    def get_events(sid: str, since: int = 0):
        session = session_of(sid)
        return {"events": session.events[since:]}

    @app.websocket("/sessions/{sid}/events")
    async def event_stream(ws: WebSocket, sid: str):
        try:
            session = wb.get(sid)
        except SessionNotFound:
            await ws.close(code=4404)
            return
        await ws.accept()
        q: queue.Queue = queue.Queue()

        def listener(event: dict):
            q.put(event)

        session.listeners.append(listener)

        def poll():
            try:
                return q.get(timeout=0.25)
            except queue.Empty:
                return None

        try:
            while True:
                event = await anyio.to_thread.run_sync(poll)
                if event is None:
                    continue
                await ws.send_json(
                    {"generation": event["generation"], "event": event}
                )
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            if listener in session.listeners:
                session.listeners.remove(listener)

    return app
