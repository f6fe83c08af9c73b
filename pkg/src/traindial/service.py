"""HTTP interface: dialogue sessions as REST resources.

One process holds one immutable SystemStack shared by all sessions. Each
session wraps a SessionRunner behind its own lock; turns carry a version
counter for optimistic concurrency, so two clients racing on the same
session get a clean conflict instead of interleaved turns. Sessions idle
longer than the expiry window are dropped lazily.
"""

from __future__ import annotations

import threading
import time
import uuid

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .dialogue import DialogueConfig
from .pipeline import (PipelineError, SessionRunner, SystemStack,
                       load_default_stack)
from .recognizer import NoiseConfig, RecognizerError
from .simulate import load_scenarios

SESSION_EXPIRY_SECONDS = 30 * 60


class SessionCreate(BaseModel):
    p_sub: float = Field(default=0.0, ge=0.0, le=1.0)
    p_del: float = Field(default=0.0, ge=0.0, le=1.0)
    p_ins: float = Field(default=0.0, ge=0.0, le=1.0)
    noise_target: str = "all"
    use_dialogue_lm: bool = True
    seed: int = 0


class TurnIn(BaseModel):
    text: str = Field(min_length=0, max_length=2000)
    version: int | None = None


class _Session:
    def __init__(self, runner: SessionRunner):
        self.runner = runner
        self.lock = threading.Lock()
        self.version = 0
        self.touched = time.monotonic()


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": {"code": code, "message": message}})


def _session_body(session_id: str, session: _Session,
                  include_transcript: bool = False) -> dict:
    runner = session.runner
    expectation = runner.state.expectations
    body = {
        "session_id": session_id,
        "version": session.version,
        "closed": runner.closed,
        "outcome": runner.state.outcome,
        "phase": runner.state.phase,
        "turn_count": runner.state.turn_count,
        "slots": runner.state.slot_view(),
        "failure_counters": dict(runner.state.failure_counters),
        "expectation": {
            "state_tag": expectation.state_tag,
            "expected_kinds": list(expectation.expected_kinds),
            "predicted_classes": list(expectation.predicted_classes),
            "strength": expectation.strength,
        },
        "noise": {"p_sub": runner.noise.p_sub, "p_del": runner.noise.p_del,
                  "p_ins": runner.noise.p_ins},
        "noise_target": runner.noise_target,
        "use_dialogue_lm": runner.use_dialogue_lm,
        "seed": runner.seed,
        "isolated_mode": runner.state.isolated_mode,
        "last_turn": runner.records[-1].to_dict(),
    }
    if include_transcript:
        body["transcript"] = runner.transcript()
    return body


def create_app(stack: SystemStack | None = None,
               clock=time.monotonic) -> FastAPI:
    app = FastAPI(title="train timetable dialogue service", docs_url=None,
                  redoc_url=None)
    # the browser console is served from its own origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    app.state.stack = stack or load_default_stack()
    app.state.sessions = {}
    app.state.sessions_lock = threading.Lock()
    app.state.clock = clock

    @app.exception_handler(RequestValidationError)
    def _on_validation_error(request, exc):
        return _error(400, "bad-request", str(exc.errors()[0].get("msg", exc)))

    def _sweep_expired() -> None:
        now = app.state.clock()
        with app.state.sessions_lock:
            stale = [sid for sid, s in app.state.sessions.items()
                     if now - s.touched > SESSION_EXPIRY_SECONDS]
            for sid in stale:
                del app.state.sessions[sid]

    def _get(session_id: str) -> _Session | None:
        _sweep_expired()
        with app.state.sessions_lock:
            session = app.state.sessions.get(session_id)
            if session is not None:
                session.touched = app.state.clock()
            return session

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "sessions": len(app.state.sessions)}

    @app.get("/scenarios")
    def scenarios() -> dict:
        rows = []
        for s in load_scenarios():
            rows.append({
                "id": s.id,
                "departure": s.departure,
                "arrival": s.arrival,
                "date_phrase": s.date_phrase,
                "time_phrase": s.time_phrase,
                "date": s.date_value.render(),
                "time": s.time_value.render(),
            })
        return {"scenarios": rows}

    @app.post("/sessions", status_code=201)
    def create_session(req: SessionCreate):
        noise = NoiseConfig(req.p_sub, req.p_del, req.p_ins)
        try:
            noise.validate()
            runner = SessionRunner(app.state.stack,
                                   dialogue_config=DialogueConfig(),
                                   noise=noise, seed=req.seed,
                                   noise_target=req.noise_target,
                                   use_dialogue_lm=req.use_dialogue_lm)
        except (RecognizerError, PipelineError) as exc:
            return _error(400, "bad-request", str(exc))
        session_id = uuid.uuid4().hex
        session = _Session(runner)
        session.touched = app.state.clock()
        with app.state.sessions_lock:
            app.state.sessions[session_id] = session
        _sweep_expired()
        return _session_body(session_id, session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = _get(session_id)
        if session is None:
            return _error(404, "not-found", f"no session {session_id}")
        with session.lock:
            return _session_body(session_id, session, include_transcript=True)

    @app.post("/sessions/{session_id}/turns")
    def post_turn(session_id: str, turn: TurnIn):
        session = _get(session_id)
        if session is None:
            return _error(404, "not-found", f"no session {session_id}")
        with session.lock:
            if turn.version is not None and turn.version != session.version:
                return _error(409, "conflict",
                              f"version {turn.version} is stale "
                              f"(current {session.version})")
            if session.runner.closed:
                return _error(409, "conflict", "session already closed")
            if not turn.text.strip():
                return _error(400, "bad-request", "empty utterance")
            record = session.runner.step(turn.text)
            session.version += 1
            body = _session_body(session_id, session)
            body["turn"] = record.to_dict()
            return body

    return app


def main(argv=None) -> None:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="serve the dialogue system")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8040)
    args = parser.parse_args(argv)
    uvicorn.run(create_app(), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
