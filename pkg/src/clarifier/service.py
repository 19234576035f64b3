"""HTTP gateway: JSON session API over a loaded engine artifact.

Sessions live in memory with an idle TTL and per-session locking; the
engine artifact itself is immutable and shared across requests.
"""

from __future__ import annotations

import threading
import time

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from clarifier.engine import Engine, EngineReply, ReplyKind, Session
from clarifier.exceptions import SessionClosedError


class MessageIn(BaseModel):
    text: str = Field(min_length=1)


class SessionCreated(BaseModel):
    session_id: str


class OptionOut(BaseModel):
    text: str


class ReplyOut(BaseModel):
    kind: str
    intent: str | None = None
    confidence: float | None = None
    question: str | None = None
    options: list[OptionOut] | None = None
    reason: str | None = None


class TranscriptEntry(BaseModel):
    speaker: str
    text: str


class SessionView(BaseModel):
    session_id: str
    state: str
    transcript: list[TranscriptEntry]
    final_intent: str | None = None


def reply_to_wire(reply: EngineReply) -> ReplyOut:
    if reply.kind is ReplyKind.FINAL:
        return ReplyOut(kind="final", intent=reply.intent, confidence=reply.confidence)
    if reply.kind is ReplyKind.CLARIFY:
        q = reply.question
        return ReplyOut(
            kind="clarify",
            question=q.text,
            options=[OptionOut(text=q.option_j), OptionOut(text=q.option_k)],
        )
    return ReplyOut(kind="rejected", reason=reply.reason)


def session_to_wire(session: Session) -> SessionView:
    return SessionView(
        session_id=session.id,
        state=session.state.value,
        transcript=[TranscriptEntry(speaker=s, text=t) for s, t in session.transcript],
        final_intent=session.final_intent,
    )


class _Stored:
    __slots__ = ("session", "lock", "last_access")

    def __init__(self, session: Session):
        self.session = session
        self.lock = threading.Lock()
        self.last_access = time.monotonic()


class SessionStore:
    """In-memory sessions with lazy TTL eviction and per-session locks."""

    def __init__(self, ttl_seconds: float = 1800.0):
        self.ttl = ttl_seconds
        self._sessions: dict[str, _Stored] = {}
        self._lock = threading.Lock()

    def _purge(self) -> None:
        now = time.monotonic()
        expired = [k for k, v in self._sessions.items() if now - v.last_access > self.ttl]
        for key in expired:
            del self._sessions[key]

    def add(self, session: Session) -> None:
        with self._lock:
            self._purge()
            self._sessions[session.id] = _Stored(session)

    def get(self, session_id: str) -> _Stored | None:
        with self._lock:
            self._purge()
            stored = self._sessions.get(session_id)
            if stored:
                stored.last_access = time.monotonic()
            return stored

    def __len__(self) -> int:
        with self._lock:
            self._purge()
            return len(self._sessions)


def create_app(
    engine: Engine,
    cors_origins: tuple[str, ...] = ("*",),
    session_ttl_seconds: float = 1800.0,
) -> FastAPI:
    app = FastAPI(title="clarifier", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(session_ttl_seconds)
    app.state.engine = engine
    app.state.sessions = store

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed request body"})

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    @app.post("/v1/sessions", response_model=SessionCreated)
    def create_session():
        session = engine.new_session()
        store.add(session)
        return SessionCreated(session_id=session.id)

    @app.get(
        "/v1/sessions/{session_id}",
        response_model=SessionView,
        response_model_exclude_none=True,
    )
    def get_session(session_id: str):
        stored = store.get(session_id)
        if stored is None:
            return JSONResponse(status_code=404, content={"detail": "unknown session"})
        with stored.lock:
            return session_to_wire(stored.session)

    @app.post(
        "/v1/sessions/{session_id}/messages",
        response_model=ReplyOut,
        response_model_exclude_none=True,
    )
    def post_message(session_id: str, message: MessageIn):
        stored = store.get(session_id)
        if stored is None:
            return JSONResponse(status_code=404, content={"detail": "unknown session"})
        with stored.lock:
            try:
                session, reply = engine.handle_message(stored.session, message.text)
            except SessionClosedError:
                return JSONResponse(
                    status_code=409, content={"detail": "session already closed"}
                )
            except ValueError as exc:
                return JSONResponse(status_code=400, content={"detail": str(exc)})
            stored.session = session
        return reply_to_wire(reply)

    return app
