"""HTTP+JSON API over the session service, plus the server CLI."""

from __future__ import annotations

import argparse
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from .backends import (
    BackendDescriptor,
    BackendProtocolError,
    BackendTimeoutError,
    GenerationParams,
    PromptFormat,
    PromptTooLongError,
)
from .document import RangeError, Selection
from .postprocess import load_rules
from .prompts import TemplateLibrary
from .service import (
    MOCK_BACKEND,
    MOCK_FLAT_BACKEND,
    RequestConsumedError,
    SessionNotFoundError,
    SessionService,
    UnknownBackendError,
    UnknownRequestError,
    VersionConflictError,
    _candidate_to_dict,
)
from .tasks import StaleRequestError, TaskKind, TaskPreconditionError


class ParamsBody(BaseModel):
    top_k: int = 40
    num_candidates: int = 3
    max_response_chars: int = 1024
    seed: int | None = None
    timeout_ms: int = 30_000


class CreateSessionBody(BaseModel):
    backend: str | None = None
    params: ParamsBody | None = None


class EditBody(BaseModel):
    start: int
    end: int
    text: str
    base_version: int


class SuggestBody(BaseModel):
    kind: TaskKind
    start: int | None = None
    end: int | None = None
    n_words: int | None = Field(default=None, ge=1)
    tone: str | None = None
    instruction: str | None = None


class AcceptBody(BaseModel):
    request_id: str
    candidate_index: int
    base_version: int


def _selection(start: int | None, end: int | None) -> Selection | None:
    if start is None and end is None:
        return None
    if start is None or end is None:
        raise RangeError("selection requires both start and end")
    return Selection(start, end)


def create_app(service: SessionService) -> FastAPI:
    app = FastAPI(title="coauthor", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def _error(status: int, exc: Exception, **extra) -> JSONResponse:
        return JSONResponse(status_code=status, content={"detail": str(exc), **extra})

    @app.exception_handler(SessionNotFoundError)
    @app.exception_handler(UnknownRequestError)
    async def _not_found(request: Request, exc: Exception):
        return _error(404, exc)

    @app.exception_handler(VersionConflictError)
    async def _conflict(request: Request, exc: VersionConflictError):
        return _error(409, exc, current_version=exc.current_version)

    @app.exception_handler(StaleRequestError)
    @app.exception_handler(RequestConsumedError)
    async def _stale(request: Request, exc: Exception):
        return _error(409, exc)

    @app.exception_handler(RangeError)
    @app.exception_handler(TaskPreconditionError)
    @app.exception_handler(UnknownBackendError)
    @app.exception_handler(IndexError)
    @app.exception_handler(ValueError)
    async def _bad_request(request: Request, exc: Exception):
        return _error(400, exc)

    @app.exception_handler(BackendTimeoutError)
    async def _timeout(request: Request, exc: Exception):
        return _error(504, exc)

    @app.exception_handler(PromptTooLongError)
    async def _too_long(request: Request, exc: Exception):
        return _error(413, exc)

    @app.exception_handler(BackendProtocolError)
    async def _bad_backend(request: Request, exc: Exception):
        return _error(502, exc)

    def _session_snapshot(session_id: str) -> dict:
        session = service.get_session(session_id)
        export = service.export_annotated(session_id)
        return {
            "session_id": session.session_id,
            "version": session.doc.version,
            "text": export["text"],
            "spans": export["spans"],
            "backend": session.backend.id,
            "created_at": session.created_at,
            "updated_at": session.updated_at,
        }

    @app.post("/sessions")
    def create_session(body: CreateSessionBody | None = None):
        body = body or CreateSessionBody()
        params = None
        if body.params is not None:
            params = GenerationParams(**body.params.model_dump())
        session = service.create_session(backend=body.backend, params=params)
        return {
            "session_id": session.session_id,
            "version": session.doc.version,
            "created_at": session.created_at,
        }

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_snapshot(session_id)

    @app.post("/sessions/{session_id}/edit")
    def edit(session_id: str, body: EditBody):
        version = service.edit(
            session_id, Selection(body.start, body.end), body.text, body.base_version
        )
        return {"version": version}

    @app.post("/sessions/{session_id}/suggest")
    def suggest(session_id: str, body: SuggestBody):
        request_id, candidates = service.suggest(
            session_id,
            body.kind,
            sel=_selection(body.start, body.end),
            n_words=body.n_words,
            tone=body.tone,
            instruction=body.instruction,
        )
        return {
            "request_id": request_id,
            "candidates": [_candidate_to_dict(c) for c in candidates],
        }

    @app.post("/sessions/{session_id}/accept")
    def accept(session_id: str, body: AcceptBody):
        version = service.accept(
            session_id, body.request_id, body.candidate_index, body.base_version
        )
        return {"version": version}

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str, format: str = "plain"):
        if format == "plain":
            return PlainTextResponse(service.export_plain(session_id))
        if format == "annotated":
            return service.export_annotated(session_id)
        raise ValueError(f"unknown export format '{format}'")

    @app.get("/sessions/{session_id}/log")
    def log(session_id: str):
        return {"records": [r.to_dict() for r in service.records(session_id)]}

    return app


def build_service(
    backend_url: str = "mock",
    template_dir: str | None = None,
    rules_file: str | None = None,
    data_dir: str | None = None,
    default_top_k: int = 40,
    default_candidates: int = 3,
) -> SessionService:
    backends = {"mock": MOCK_BACKEND, "mock-flat": MOCK_FLAT_BACKEND}
    default_backend = "mock"
    if backend_url != "mock":
        backends["remote"] = BackendDescriptor("remote", PromptFormat.DIALOG, backend_url)
        backends["remote-flat"] = BackendDescriptor("remote-flat", PromptFormat.FLAT, backend_url)
        default_backend = "remote"
    templates = TemplateLibrary.from_dir(template_dir) if template_dir else None
    rules = load_rules(rules_file) if rules_file else None
    return SessionService(
        backends=backends,
        default_backend=default_backend,
        default_params=GenerationParams(top_k=default_top_k, num_candidates=default_candidates),
        templates=templates,
        rules=rules,
        data_dir=Path(data_dir) if data_dir else None,
    )


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(prog="coauthor-server", description=__doc__)
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--backend-url", default="mock", help='generation endpoint URL, or "mock"')
    parser.add_argument("--template-dir", default=None, help="directory of task template files")
    parser.add_argument("--rules-file", default=None, help="meta-text rules file")
    parser.add_argument("--data-dir", default=None, help="session persistence directory")
    parser.add_argument("--default-top-k", type=int, default=40)
    parser.add_argument("--default-candidates", type=int, default=3)
    args = parser.parse_args(argv)

    service = build_service(
        backend_url=args.backend_url,
        template_dir=args.template_dir,
        rules_file=args.rules_file,
        data_dir=args.data_dir,
        default_top_k=args.default_top_k,
        default_candidates=args.default_candidates,
    )
    import uvicorn

    uvicorn.run(create_app(service), host="127.0.0.1", port=args.port)


if __name__ == "__main__":
    main()
