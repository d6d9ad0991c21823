"""HTTP facade over the session engine (FastAPI, /v1 prefix).

Request/response bodies are JSON documents; images travel as PNG bytes.
Domain failures inside an otherwise valid call (a non-converged alignment)
are reported in-document, while protocol errors map to HTTP statuses:
400 for bad input, 404 for unknown ids, 409 for state conflicts.
"""

from __future__ import annotations

import base64

import numpy as np
from fastapi import FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (BlankSketchError, CloudSketchError, DegenerateGeometryError,
                     ParseError, SessionStateError)
from .icp import IcpResult, serialize_icp_result
from .session import Engine, Session, UnknownModelError, UnknownSessionError


class CreateSessionBody(BaseModel):
    canvas_w: int = 512
    canvas_h: int = 512
    seed: int = 0


class SelectBody(BaseModel):
    model_id: int


class DirectionBody(BaseModel):
    direction: list[float]


def _alignment_doc(result: IcpResult | None) -> dict | None:
    if result is None:
        return None
    return {"rotation": result.transform.rotation.reshape(-1).tolist(),
            "translation": result.transform.translation.tolist(),
            "prescale": result.prescale,
            "error": result.error,
            "iterations": result.iterations,
            "converged": result.converged,
            "serialized": serialize_icp_result(result)}


def _session_doc(session: Session) -> dict:
    return {"session_id": session.id,
            "state": session.state,
            "canvas": [session.canvas_w, session.canvas_h],
            "seed": session.seed,
            "cloud_points": None if session.cloud is None else int(len(session.cloud)),
            "hits": [{"model_id": h.model_id, "view_index": h.view_index,
                      "similarity": h.similarity} for h in session.hits],
            "selected_model": session.selected_model,
            "alignment": _alignment_doc(session.alignment),
            "metrics": session.metrics.as_dict(),
            "history_length": len(session.history)}


def _error_response(status: int, exc: Exception, **extra) -> JSONResponse:
    doc = {"error": {"type": type(exc).__name__, "message": str(exc), **extra}}
    return JSONResponse(status_code=status, content=doc)


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="cloudsketch", version="1")
    # the browser UI is served separately (static files), so allow it in
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.exception_handler(SessionStateError)
    async def _state_conflict(_req, exc: SessionStateError):
        return _error_response(409, exc, state=exc.state, action=exc.action)

    @app.exception_handler(UnknownSessionError)
    async def _unknown_session(_req, exc):
        return _error_response(404, exc)

    @app.exception_handler(UnknownModelError)
    async def _unknown_model(_req, exc):
        return _error_response(404, exc)

    @app.exception_handler(ParseError)
    async def _parse_error(_req, exc: ParseError):
        return _error_response(400, exc, line=exc.line)

    @app.exception_handler(BlankSketchError)
    async def _blank(_req, exc):
        return _error_response(400, exc)

    @app.exception_handler(DegenerateGeometryError)
    async def _degenerate(_req, exc):
        return _error_response(400, exc)

    @app.exception_handler(ValueError)
    async def _value_error(_req, exc):
        return _error_response(400, exc)

    @app.exception_handler(CloudSketchError)
    async def _domain_error(_req, exc):
        return _error_response(400, exc)

    @app.get("/v1/models")
    def list_models():
        if engine.manifest is None:
            return {"models": []}
        return {"models": [{"model_id": mid, "name": e.name, "category": e.category}
                           for mid, e in sorted(engine.manifest.models().items())]}

    @app.get("/v1/models/{model_id}/views/{view_index}/contour.png")
    def model_contour(model_id: int, view_index: int):
        if engine.manifest is None:
            raise UnknownModelError("no manifest loaded")
        for e in engine.manifest.entries:
            if e.model_id == model_id and e.view_index == view_index:
                return Response(content=engine.manifest.resolve(e.image_path).read_bytes(),
                                media_type="image/png")
        raise UnknownModelError(f"no contour for model {model_id} view {view_index}")

    @app.post("/v1/sessions")
    def create_session(body: CreateSessionBody | None = None):
        body = body or CreateSessionBody()
        session = engine.create_session(body.canvas_w, body.canvas_h, body.seed)
        return _session_doc(session)

    @app.get("/v1/sessions/{sid}")
    def get_session(sid: str):
        return _session_doc(engine.get(sid))

    @app.post("/v1/sessions/{sid}/cloud")
    async def load_cloud(sid: str, request: Request, format: str | None = Query(None)):
        body = await request.body()
        session = engine.load_pointcloud(sid, body, fmt=format)
        return _session_doc(session)

    @app.get("/v1/sessions/{sid}/view")
    def get_view(sid: str, dx: float, dy: float, dz: float,
                 w: int | None = None, h: int | None = None):
        coords, png = engine.get_view(sid, (dx, dy, dz), w, h)
        return {"width": w or engine.get(sid).canvas_w,
                "height": h or engine.get(sid).canvas_h,
                "points": np.asarray(coords).tolist(),
                "png_base64": base64.b64encode(png).decode("ascii")}

    @app.post("/v1/sessions/{sid}/sketch")
    async def submit_sketch(sid: str, request: Request):
        png = await request.body()
        hits = engine.submit_sketch(sid, png)
        doc = _session_doc(engine.get(sid))
        doc["hits"] = [{"model_id": h.model_id, "view_index": h.view_index,
                        "similarity": h.similarity} for h in hits]
        return doc

    @app.post("/v1/sessions/{sid}/select")
    def select_and_align(sid: str, body: SelectBody):
        engine.select_and_align(sid, body.model_id)
        return _session_doc(engine.get(sid))

    @app.post("/v1/sessions/{sid}/contour")
    def extract_contour(sid: str, body: DirectionBody):
        if len(body.direction) != 3:
            raise ValueError("direction must have 3 components")
        png = engine.extract_contour(sid, body.direction)
        return Response(content=png, media_type="image/png")

    @app.post("/v1/sessions/{sid}/export")
    def export_model(sid: str):
        obj_text, metrics = engine.export_model(sid)
        return {"obj": obj_text, "metrics": metrics.as_dict()}

    return app
