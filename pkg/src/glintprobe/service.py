"""Probe session HTTP API.

A session pins one randomized probing pattern for its lifetime; the operator
displays that pattern, uploads captured frames, watches per-frame scores on a
live event stream, and concludes to get the aggregate verdict.

Endpoints:
    POST /sessions                       create (optional config overrides)
    GET  /sessions/{id}/pattern          pattern raster (PPM; ?size=)
    POST /sessions/{id}/frames           multipart frame (+ optional landmarks)
    POST /sessions/{id}/conclude         final verdict (idempotent)
    GET  /sessions/{id}/events           server-sent events (score/verdict)
    GET  /healthz

Frames are PPM (bit-exact reference path) or PNG bytes.  When no landmarks
accompany a frame the demo-mode fixed crop boxes are used.  Sessions live in
memory with TTL eviction; creations and verdicts append to a JSONL audit log.
"""

from __future__ import annotations

import asyncio
import io
import json
import secrets
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from fastapi import Body, FastAPI, File, Form, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse

from .errors import GlintProbeError, ParameterError
from .images import RgbImage, decode_ppm, encode_ppm
from .patterns import ProbingPattern, random_pattern, rasterize
from .pipeline import (
    PipelineConfig,
    ProbeVerdict,
    StaticLandmarks,
    aggregate_verdicts,
    landmarks_from_dict,
    verify_frame,
)
from .simulator import default_eye_landmarks

DEFAULT_TTL_SECONDS = 3600.0
DEFAULT_PATTERN_PX = 512

OPEN = "Open"
CONCLUDED = "Concluded"


@dataclass
class ProbeSession:
    id: str
    pattern: ProbingPattern
    config: PipelineConfig
    created: float
    last_touch: float
    state: str = OPEN
    records: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    final: Optional[ProbeVerdict] = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self, ttl_seconds: float):
        self._ttl = ttl_seconds
        self._sessions: dict[str, ProbeSession] = {}
        self._lock = threading.Lock()

    def add(self, session: ProbeSession) -> None:
        with self._lock:
            self._evict(time.monotonic())
            self._sessions[session.id] = session

    def get(self, session_id: str) -> ProbeSession:
        with self._lock:
            now = time.monotonic()
            self._evict(now)
            session = self._sessions.get(session_id)
            if session is None:
                raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
            session.last_touch = now
            return session

    def _evict(self, now: float) -> None:
        dead = [sid for sid, s in self._sessions.items() if now - s.last_touch > self._ttl]
        for sid in dead:
            del self._sessions[sid]


def _decode_frame(data: bytes) -> RgbImage:
    if data[:2] == b"P6":
        return decode_ppm(data)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        from PIL import Image

        with Image.open(io.BytesIO(data)) as im:
            return RgbImage(np.asarray(im.convert("RGB")))
    raise ParameterError("frame must be PPM (P6) or PNG bytes")


def create_app(
    default_config: Optional[PipelineConfig] = None,
    audit_path=None,
    ttl_seconds: float = DEFAULT_TTL_SECONDS,
) -> FastAPI:
    app = FastAPI(title="glintprobe", version="0.1.0")
    # the operator console is served separately; let browsers reach the API
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])
    base_config = default_config or PipelineConfig()
    store = SessionStore(ttl_seconds)
    audit_lock = threading.Lock()

    def audit(event: dict) -> None:
        if audit_path is None:
            return
        line = json.dumps(event)
        with audit_lock:
            with open(audit_path, "a") as fh:
                fh.write(line + "\n")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "service": "glintprobe"}

    @app.post("/sessions", status_code=201)
    def create_session(payload: Optional[dict] = Body(None)):
        payload = payload or {}
        if not isinstance(payload, dict):
            raise HTTPException(status_code=400, detail="body must be a JSON object")
        try:
            overrides = payload.get("overrides") or {}
            if not isinstance(overrides, dict):
                raise ParameterError("overrides must be an object")
            config = PipelineConfig.from_dict({**base_config.to_dict(), **overrides})
            seed = payload.get("seed")
            seed = secrets.randbits(63) if seed is None else int(seed)
            pattern = random_pattern(
                seed,
                shapes=payload.get("shapes"),
                text_payload=payload.get("text"),
            )
        except (ParameterError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        now = time.monotonic()
        session = ProbeSession(
            id=uuid.uuid4().hex,
            pattern=pattern,
            config=config,
            created=now,
            last_touch=now,
        )
        store.add(session)
        audit(
            {
                "event": "create",
                "ts": time.time(),
                "session": session.id,
                "pattern": pattern.to_dict(),
                "threshold": config.ncc_threshold,
            }
        )
        return {
            "id": session.id,
            "pattern": pattern.to_dict(),
            "config": config.to_dict(),
            "pattern_url": f"/sessions/{session.id}/pattern",
        }

    @app.get("/sessions/{session_id}/pattern")
    def get_pattern(session_id: str, size: int = DEFAULT_PATTERN_PX):
        session = store.get(session_id)
        try:
            raster = rasterize(session.pattern, size)
        except ParameterError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return Response(content=encode_ppm(raster.to_rgb()), media_type="image/x-portable-pixmap")

    @app.post("/sessions/{session_id}/frames")
    def submit_frame(
        session_id: str,
        frame: bytes = File(...),
        landmarks: Optional[str] = Form(None),
    ):
        session = store.get(session_id)
        try:
            rgb = _decode_frame(frame)
            if landmarks:
                provider = StaticLandmarks(landmarks_from_dict(json.loads(landmarks)))
            else:
                provider = StaticLandmarks(default_eye_landmarks())
        except (GlintProbeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"bad frame or landmarks: {exc}")
        with session.lock:
            if session.state != OPEN:
                raise HTTPException(status_code=409, detail="session already concluded")
            verdict = verify_frame(rgb, session.pattern, session.config, provider)
            record = {"index": len(session.records), **verdict.to_dict()}
            session.records.append(record)
            session.verdicts.append(verdict)
        return record

    @app.post("/sessions/{session_id}/conclude")
    def conclude_session(session_id: str):
        session = store.get(session_id)
        with session.lock:
            if session.state == CONCLUDED:
                return session.final.to_dict()
            if not session.verdicts:
                raise HTTPException(status_code=400, detail="no frames submitted")
            session.final = aggregate_verdicts(session.verdicts, session.config.ncc_threshold)
            session.state = CONCLUDED
        audit(
            {
                "event": "conclude",
                "ts": time.time(),
                "session": session.id,
                "frames": len(session.records),
                "verdict": session.final.to_dict(),
            }
        )
        return session.final.to_dict()

    @app.get("/sessions/{session_id}/events")
    async def stream_events(session_id: str):
        session = store.get(session_id)

        async def gen():
            sent = 0
            while True:
                with session.lock:
                    pending = session.records[sent:]
                    state = session.state
                    final = session.final
                for record in pending:
                    yield f"event: score\ndata: {json.dumps(record)}\n\n"
                sent += len(pending)
                if state == CONCLUDED:
                    yield f"event: verdict\ndata: {json.dumps(final.to_dict())}\n\n"
                    return
                await asyncio.sleep(0.05)

        return StreamingResponse(gen(), media_type="text/event-stream")

    return app
