"""HTTP session service: the interactive refinement loop behind a REST API.

One session per image being annotated.  Each click runs a full round —
predict, then push the probabilities around the click — and stores both
maps for the next round, plus an undo snapshot of the state before the
click.  Mutations on one session are serialized (a second writer gets a
conflict); distinct sessions share nothing but the read-only model
parameters.  Idle sessions are evicted after a TTL.
"""

from __future__ import annotations

import base64
import binascii
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import ClickRefineError, ConfigError, ValidationError
from .evaluation.metrics import iou
from .imageio import (image_rgb_from_bytes, mask_from_png_bytes,
                      mask_to_png_bytes, prob_to_png_bytes)
from .interaction import MAX_CLICKS, NEGATIVE, POSITIVE, Click, click_to_json
from .model import ModelConfig, load_checkpoint, predict
from .modulation import modulate
from .state import SessionState, new_session


@dataclass(frozen=True)
class ServiceConfig:
    max_image_dim: int = 2048
    ttl_seconds: float = 30 * 60.0

    def __post_init__(self):
        if self.max_image_dim < 1:
            raise ConfigError("max_image_dim must be positive")
        if self.ttl_seconds <= 0:
            raise ConfigError("ttl_seconds must be positive")


class ApiError(ClickRefineError):
    """Carries the HTTP status and the machine-readable error code."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code


@dataclass
class _Entry:
    state: SessionState
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_used: float = 0.0


class SessionStore:
    """Thread-safe session registry with idle eviction.

    The registry lock only guards the id -> entry map; per-session work
    happens under the entry's own lock, so sessions never block each
    other.  ``time_fn`` is injectable for TTL tests.
    """

    def __init__(self, ttl_seconds: float, time_fn=time.monotonic):
        self._ttl = ttl_seconds
        self._now = time_fn
        self._lock = threading.Lock()
        self._entries: dict[str, _Entry] = {}

    def _evict_expired(self) -> None:
        cutoff = self._now() - self._ttl
        for sid in [s for s, e in self._entries.items() if e.last_used < cutoff]:
            del self._entries[sid]

    def create(self, state: SessionState) -> None:
        with self._lock:
            self._evict_expired()
            self._entries[state.session_id] = _Entry(state, last_used=self._now())

    def get(self, session_id: str) -> _Entry:
        with self._lock:
            self._evict_expired()
            entry = self._entries.get(session_id)
            if entry is None:
                raise ApiError(404, "unknown_session", f"no session {session_id!r}")
            entry.last_used = self._now()
            return entry

    def remove(self, session_id: str) -> None:
        with self._lock:
            if session_id not in self._entries:
                raise ApiError(404, "unknown_session", f"no session {session_id!r}")
            del self._entries[session_id]

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


class CreateSessionBody(BaseModel):
    image: str
    gt: str | None = None


class ClickBody(BaseModel):
    x: int
    y: int
    kind: str


def _decode_b64(payload: str, what: str) -> bytes:
    try:
        return base64.b64decode(payload, validate=True)
    except (binascii.Error, TypeError, ValueError) as exc:
        raise ApiError(400, "bad_payload", f"{what} is not valid base64: {exc}")


def _state_payload(state: SessionState) -> dict:
    mask = state.m_prev >= 0.5
    return {
        "session_id": state.session_id,
        "round": state.round_index,
        "clicks": [click_to_json(c) for c in state.clicks],
        "iou": iou(mask, state.gt) if state.gt is not None else None,
        "mask_png": base64.b64encode(mask_to_png_bytes(mask)).decode(),
        "prob_png": base64.b64encode(
            prob_to_png_bytes(np.clip(state.m_prev, 0.0, 1.0))).decode(),
    }


def create_app(params, model_config: ModelConfig,
               service_config: ServiceConfig | None = None,
               static_dir: str | Path | None = None,
               time_fn=time.monotonic) -> FastAPI:
    """Assemble the service around one loaded model.

    Endpoints are plain (non-async) handlers so the framework runs them
    on worker threads: sessions make progress independently, and the
    per-session lock is what serializes same-session writers.
    """
    service_config = service_config or ServiceConfig()
    store = SessionStore(service_config.ttl_seconds, time_fn=time_fn)
    app = FastAPI(title="clickrefine", docs_url=None, redoc_url=None)
    app.state.store = store

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"error": exc.code, "message": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def _invalid_request(request: Request, exc: RequestValidationError):
        parts = [".".join(str(p) for p in e["loc"]) + ": " + e["msg"]
                 for e in exc.errors()[:5]]
        return JSONResponse(status_code=400,
                            content={"error": "invalid_request",
                                     "message": "; ".join(parts)})

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        try:
            image = image_rgb_from_bytes(_decode_b64(body.image, "image"))
        except ValidationError as exc:
            raise ApiError(400, "bad_image", str(exc))
        h, w = image.shape[1], image.shape[2]
        limit = service_config.max_image_dim
        if max(h, w) > limit:
            raise ApiError(413, "image_too_large",
                           f"image is {w}x{h}; limit is {limit} per side")
        gt = None
        if body.gt is not None:
            gt = mask_from_png_bytes(_decode_b64(body.gt, "gt"))
            if gt.shape != (h, w):
                raise ApiError(400, "bad_gt", f"gt is {gt.shape}, image is {(h, w)}")
        session_id = secrets.token_urlsafe(16)
        try:
            state = new_session(session_id, image, gt=gt)
        except ValidationError as exc:
            raise ApiError(400, "bad_image", str(exc))
        store.create(state)
        return _state_payload(state)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        entry = store.get(session_id)
        with entry.lock:
            return _state_payload(entry.state)

    @app.post("/sessions/{session_id}/clicks")
    def apply_click(session_id: str, body: ClickBody):
        if body.kind not in ("pos", "neg"):
            raise ApiError(400, "invalid_click",
                           f"kind must be 'pos' or 'neg', got {body.kind!r}")
        entry = store.get(session_id)
        if not entry.lock.acquire(blocking=False):
            raise ApiError(409, "busy",
                           "another mutation is in flight for this session")
        try:
            state = entry.state
            h, w = state.shape
            if not (0 <= body.x < w and 0 <= body.y < h):
                raise ApiError(400, "out_of_bounds",
                               f"click ({body.x}, {body.y}) outside {w}x{h} image")
            if len(state.clicks) >= MAX_CLICKS:
                raise ApiError(409, "click_budget_exhausted",
                               f"session already has {MAX_CLICKS} clicks")
            click = Click(x=body.x, y=body.y,
                          kind=POSITIVE if body.kind == "pos" else NEGATIVE,
                          ordinal=state.round_index + 1)
            state.push_snapshot()
            state.clicks.append(click)
            probs = predict(state, params, model_config)
            state.m_prev = probs
            state.m_mod = modulate(probs, click, state.clicks).astype(np.float32)
            return _state_payload(state)
        finally:
            entry.lock.release()

    @app.post("/sessions/{session_id}/undo")
    def undo_click(session_id: str):
        entry = store.get(session_id)
        if not entry.lock.acquire(blocking=False):
            raise ApiError(409, "busy",
                           "another mutation is in flight for this session")
        try:
            try:
                entry.state.undo()
            except ValidationError as exc:
                raise ApiError(409, "nothing_to_undo", str(exc))
            return _state_payload(entry.state)
        finally:
            entry.lock.release()

    @app.get("/sessions/{session_id}/mask.png")
    def get_mask(session_id: str):
        entry = store.get(session_id)
        with entry.lock:
            data = mask_to_png_bytes(entry.state.m_prev >= 0.5)
        return Response(content=data, media_type="image/png")

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        store.remove(session_id)
        return Response(status_code=204)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="ui")
    return app


def app_from_checkpoint(checkpoint: str,
                        service_config: ServiceConfig | None = None,
                        static_dir: str | Path | None = None) -> FastAPI:
    params, model_config = load_checkpoint(checkpoint)
    return create_app(params, model_config, service_config=service_config,
                      static_dir=static_dir)
