"""Local HTTP/JSON service with incremental power-curve streaming.

One logical writer per session: updates serialize through a per-session
lock and bump the session epoch. Power-curve streams tag every message
with the epoch they were started under; a fresher update supersedes the
stream, which then stops after a terminal cancelled message. Clients drop
any message whose epoch is not their latest.
"""

from __future__ import annotations

import json
import queue
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .errors import PowerforgeError, UnknownNode
from .session import (
    Session,
    apply_update,
    create_session,
    restore_node,
    session_from_document,
    session_to_document,
)
from .design import DependentVariableMeta, IndependentVariable
from .effects import confound_preview, slider_ranges
from .stats import PowerPoint, pairwise_frames, power_curve


@dataclass
class SessionHandle:
    session: Session
    lock: threading.Lock = field(default_factory=threading.Lock)
    epoch: int = 0
    frames_cache: tuple | None = None  # (fingerprint, payload)
    frames_computed: int = 0  # diagnostic: how many frame simulations ran


class SessionRegistry:
    def __init__(self):
        self._handles: dict[str, SessionHandle] = {}
        self._lock = threading.Lock()

    def add(self, session: Session) -> str:
        session_id = uuid.uuid4().hex[:12]
        with self._lock:
            self._handles[session_id] = SessionHandle(session=session)
        return session_id

    def get(self, session_id: str) -> SessionHandle:
        with self._lock:
            handle = self._handles.get(session_id)
        if handle is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return handle


def _error_response(exc: PowerforgeError, status: int = 400) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": exc.code, "message": str(exc)}
    )


def _frames_fingerprint(session: Session) -> tuple:
    """Everything the pairwise view depends on; trade-off selections excluded."""
    return (
        session.tree.axis_iv,
        session.tree.values,
        tuple(
            (name, getattr(session.confounds, name))
            for name in (
                "fatigue_per_trial",
                "carryover_magnitude",
                "carryover_decay",
                "practice_within_condition",
                "practice_whole_experiment",
                "participant_sd",
                "residual_sd",
            )
        ),
        session.design.strategy,
        session.design.replications,
        session.design.participants,
        session.pairwise_pairs,
        session.settings.alpha,
        session.settings.seed,
    )


def create_app(frontend_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="powerforge")
    registry = SessionRegistry()
    app.state.registry = registry

    @app.exception_handler(PowerforgeError)
    async def on_powerforge_error(_req: Request, exc: PowerforgeError):
        status = 404 if isinstance(exc, UnknownNode) else 400
        return _error_response(exc, status)

    @app.post("/sessions")
    async def post_session(body: dict):
        if "document" in body:
            session = session_from_document(body["document"])
        else:
            dv_raw = body["dv_meta"]
            dv = DependentVariableMeta(
                name=dv_raw["name"],
                unit=dv_raw["unit"],
                range_min=float(dv_raw["range_min"]),
                range_max=float(dv_raw["range_max"]),
                direction=dv_raw["direction"],
                variability=float(dv_raw["variability"]),
            )
            ivs = tuple(
                IndependentVariable(raw["name"], tuple(raw["levels"])) for raw in body["ivs"]
            )
            session = create_session(dv, ivs)
        session_id = registry.add(session)
        return {
            "id": session_id,
            "document": session_to_document(session),
            "slider_ranges": [vars(r) for r in slider_ranges(session.dv)],
        }

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        handle = registry.get(session_id)
        with handle.lock:
            return {
                "id": session_id,
                "epoch": handle.epoch,
                "document": session_to_document(handle.session),
            }

    @app.put("/sessions/{session_id}")
    async def put_session(session_id: str, body: dict):
        handle = registry.get(session_id)
        session = session_from_document(body["document"] if "document" in body else body)
        with handle.lock:
            handle.session = session
            handle.epoch += 1
            return {"id": session_id, "epoch": handle.epoch}

    @app.post("/sessions/{session_id}/updates")
    async def post_update(session_id: str, body: dict):
        handle = registry.get(session_id)
        with handle.lock:
            warnings = apply_update(handle.session, body)
            handle.epoch += 1
            return {
                "epoch": handle.epoch,
                "warnings": [
                    {"code": w.code, "message": w.message, "details": list(w.details)}
                    for w in warnings
                ],
                "document": session_to_document(handle.session),
            }

    @app.get("/sessions/{session_id}/power-curve")
    async def get_power_curve(session_id: str, tier: str = "both"):
        handle = registry.get(session_id)
        with handle.lock:
            epoch = handle.epoch
            session = handle.session
            model = session.population_model()
            pair = session.tradeoff_pair()
            axis = session.tradeoff.axis
            xs = session.curve_range()
            settings = session.settings

        out: queue.Queue = queue.Queue()

        def emit(point: PowerPoint) -> None:
            out.put(
                {
                    "epoch": epoch,
                    "tier": point.tier.value,
                    "x": point.x,
                    "power": point.power,
                    "mc_stderr": point.mc_stderr,
                    "done": False,
                }
            )

        def worker() -> None:
            try:
                power_curve(
                    model,
                    pair,
                    axis,
                    xs,
                    settings.k_datasets,
                    settings.alpha,
                    settings.seed,
                    emit=emit,
                    cancel=lambda: handle.epoch != epoch,
                    tier=tier,
                )
                out.put({"epoch": epoch, "done": True, "cancelled": False})
            except PowerforgeError:
                out.put({"epoch": epoch, "done": True, "cancelled": True})

        thread = threading.Thread(target=worker, daemon=True)
        thread.start()

        def stream():
            while True:
                message = out.get()
                yield f"data: {json.dumps(message)}\n\n"
                if message.get("done"):
                    return

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.get("/sessions/{session_id}/pairwise-frames")
    async def get_pairwise_frames(session_id: str, frames: int = 30):
        handle = registry.get(session_id)
        with handle.lock:
            session = handle.session
            fingerprint = (_frames_fingerprint(session), frames)
            if handle.frames_cache is not None and handle.frames_cache[0] == fingerprint:
                return handle.frames_cache[1]
            model = session.population_model()
            frame_lists = pairwise_frames(
                model,
                session.pairwise_pairs,
                session.design.participants,
                frames,
                session.settings.alpha,
                session.settings.seed,
            )
            handle.frames_computed += 1
            payload = {
                "frames": [
                    [
                        {
                            "pair": f.pair.label(),
                            "mean_diff": f.mean_diff,
                            "ci_lo": f.ci_lo,
                            "ci_hi": f.ci_hi,
                            "cohens_d": None if f.degenerate else f.cohens_d,
                            "degenerate": f.degenerate,
                            "better_level": f.better_level,
                        }
                        for f in frame
                    ]
                    for frame in frame_lists
                ],
                "unit": session.dv.unit,
                "alpha": session.settings.alpha,
            }
            handle.frames_cache = (fingerprint, payload)
            return payload

    @app.get("/sessions/{session_id}/confound-preview")
    async def get_confound_preview(session_id: str):
        handle = registry.get(session_id)
        with handle.lock:
            session = handle.session
            bars = confound_preview(
                session.design,
                session.confounds,
                session.tree.cell_means(),
                session.settings.seed,
            )
            return {
                "bars": [
                    {"trial": t, "condition": list(cond), "expected": value}
                    for t, cond, value in bars
                ]
            }

    @app.post("/sessions/{session_id}/history/{node_id}/restore")
    async def post_restore(session_id: str, node_id: int):
        handle = registry.get(session_id)
        with handle.lock:
            restore_node(handle.session, node_id)
            handle.epoch += 1
            return {"epoch": handle.epoch, "document": session_to_document(handle.session)}

    @app.post("/sessions/{session_id}/history/{node_id}/mark")
    async def post_mark(session_id: str, node_id: int, body: dict):
        handle = registry.get(session_id)
        with handle.lock:
            handle.session.history.set_mark(node_id, bool(body.get("marked", True)))
            return {"epoch": handle.epoch, "marked": bool(body.get("marked", True))}

    @app.get("/sessions/{session_id}/history/{node_id}/diff/{other_id}")
    async def get_diff(session_id: str, node_id: int, other_id: int):
        handle = registry.get(session_id)
        with handle.lock:
            diff = handle.session.history.preview_diff(node_id, other_id)
            return {
                "mean_changes": [list(c) for c in diff.mean_changes],
                "lock_changes": [list(c) for c in diff.lock_changes],
                "axis_change": list(diff.axis_change) if diff.axis_change else None,
                "confound_changes": [list(c) for c in diff.confound_changes],
                "design_changes": [
                    [name, _plain(a), _plain(b)] for name, a, b in diff.design_changes
                ],
                "pairwise_selection_changed": diff.pairwise_selection_changed,
                "power_pair": list(diff.power_pair),
                "empty": diff.empty,
            }

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=frontend_dir, html=True), name="ui")

    return app


def _plain(value):
    return value.value if hasattr(value, "value") else value
