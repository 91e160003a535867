"""HTTP JSON API over the editing service."""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .errors import (
    ConfigError,
    CorpusError,
    DanglingShapeReference,
    GeometryError,
    InstructionError,
    LayoutEditError,
    LayoutInvariantError,
    LayoutSchemaError,
    LayoutSyntaxError,
    LlmProtocolError,
    LlmRejected,
    LlmUnavailable,
    NoLayoutFound,
    NothingToUndo,
    NotAnOracleCommand,
    RendererProtocolError,
    RendererRejected,
    RendererUnavailable,
    SelectionError,
    ShapeParseError,
    ShapeValidationError,
    UnknownSession,
)
from .instruction import instruction_from_jsonable
from .layout_text import layout_from_jsonable, layout_to_jsonable
from .service import COMPLETION_EXCERPT_CHARS, EditingService

_STATUS_BY_ERROR: list[tuple[type[LayoutEditError], int]] = [
    (UnknownSession, 404),
    (NothingToUndo, 409),
    (LlmUnavailable, 503),
    (RendererUnavailable, 503),
    (LlmRejected, 502),
    (LlmProtocolError, 502),
    (NoLayoutFound, 502),
    (RendererProtocolError, 502),
    (RendererRejected, 502),
    (ConfigError, 400),
    (ShapeParseError, 422),
    (ShapeValidationError, 422),
    (DanglingShapeReference, 422),
    (InstructionError, 422),
    (LayoutSyntaxError, 422),
    (LayoutSchemaError, 422),
    (LayoutInvariantError, 422),
    (SelectionError, 422),
    (NotAnOracleCommand, 422),
    (GeometryError, 422),
    (CorpusError, 500),
]


def _status_for(error: LayoutEditError) -> int:
    for error_type, status in _STATUS_BY_ERROR:
        if isinstance(error, error_type):
            return status
    return 500


def create_app(service: EditingService) -> FastAPI:
    app = FastAPI(title="layoutedit", docs_url=None, redoc_url=None)
    # the web UI is served from a different origin (static files)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST", "OPTIONS"],
        allow_headers=["Content-Type"],
    )

    @app.exception_handler(LayoutEditError)
    async def handle_domain_error(request: Request, exc: LayoutEditError) -> JSONResponse:
        return JSONResponse(status_code=_status_for(exc), content=exc.to_jsonable())

    @app.get("/v1/health")
    def health() -> dict[str, Any]:
        return {
            "status": "ok",
            "engines": service.engines(),
            "renderers": service.renderers(),
        }

    @app.post("/v1/sessions", status_code=201)
    async def create_session(request: Request) -> dict[str, Any]:
        body = await _json_body(request)
        prompt = body.get("prompt")
        layout_raw = body.get("layout")
        if (prompt is None) == (layout_raw is None):
            raise ConfigError("provide exactly one of 'prompt' or 'layout'")
        if prompt is not None:
            if not isinstance(prompt, str):
                raise ConfigError("'prompt' must be a string")
            session = service.create_session(prompt=prompt)
        else:
            session = service.create_session(layout=layout_from_jsonable(layout_raw))
        return {
            "session_id": session.session_id,
            "layout": layout_to_jsonable(session.current),
        }

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str) -> dict[str, Any]:
        session = service.store.get(session_id)
        with session.lock:
            return {
                "layout": layout_to_jsonable(session.current),
                "history": [record.summary() for record in session.history],
                "created_at": session.created_at,
                "updated_at": session.updated_at,
            }

    @app.post("/v1/sessions/{session_id}/instructions")
    async def apply_instruction(session_id: str, request: Request) -> dict[str, Any]:
        body = await _json_body(request)
        engine = body.get("engine", "auto")
        if not isinstance(engine, str):
            raise ConfigError("'engine' must be a string")
        instruction = instruction_from_jsonable(
            {"tokens": body.get("tokens"), "shapes": body.get("shapes", {})}
        )
        record = service.apply_instruction(session_id, instruction, engine=engine)
        payload: dict[str, Any] = {
            "layout": layout_to_jsonable(record.after),
            "validation": record.validation.to_jsonable(),
            "engine": record.engine,
        }
        if record.completion_text is not None:
            payload["completion_excerpt"] = record.completion_text[:COMPLETION_EXCERPT_CHARS]
        return payload

    @app.post("/v1/sessions/{session_id}/undo")
    def undo(session_id: str) -> dict[str, Any]:
        layout = service.undo(session_id)
        return {"layout": layout_to_jsonable(layout)}

    @app.get("/v1/sessions/{session_id}/render")
    def render(session_id: str, backend: str | None = None) -> Response:
        artifact = service.render_session(session_id, backend)
        return Response(
            content=artifact.data,
            media_type=artifact.media_type,
            headers={
                "X-Renderer-Id": artifact.renderer_id,
                "X-Layout-Hash": artifact.layout_hash,
            },
        )

    return app


async def _json_body(request: Request) -> dict[str, Any]:
    try:
        body = await request.json()
    except ValueError as exc:
        raise ConfigError(f"request body is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise ConfigError("request body must be a JSON object")
    return body
