"""Session service: ties the document model, task builders, backends, and
post-processing together, with optimistic concurrency and interaction logging.

Within a session, mutations (edit/accept) are serialized behind a lock and
guarded by a base_version check; suggest never mutates the document and never
holds the write lock while the backend call is in flight.

Persistence is one JSON file per session plus an append-only JSONL corpus of
interaction events, trivially ingestible for later analysis or training.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .backends import (
    MOCK_ENDPOINT,
    BackendDescriptor,
    Candidate,
    GenerationParams,
    PromptFormat,
    generate,
)
from .document import (
    HUMAN,
    AuthorKind,
    Provenance,
    Selection,
    Span,
    StoryDocument,
)
from .postprocess import MetaRule, pipeline
from .prompts import ConversationContext, Role, TemplateLibrary, Turn
from .tasks import (
    PromptRequest,
    TaskKind,
    apply_candidate,
    continuation_request,
    custom_request,
    elaborate_request,
    infill_request,
    rewrite_request,
)

MOCK_BACKEND = BackendDescriptor(id="mock", format=PromptFormat.DIALOG, endpoint=MOCK_ENDPOINT)
MOCK_FLAT_BACKEND = BackendDescriptor(id="mock-flat", format=PromptFormat.FLAT, endpoint=MOCK_ENDPOINT)


class SessionNotFoundError(KeyError):
    pass


class UnknownBackendError(ValueError):
    pass


class UnknownRequestError(KeyError):
    pass


class RequestConsumedError(RuntimeError):
    """The request was already accepted once; acceptance is single-use."""


class VersionConflictError(RuntimeError):
    """base_version does not match the current document version."""

    def __init__(self, current_version: int):
        super().__init__(f"stale base_version; document is at version {current_version}")
        self.current_version = current_version


class IntegrityError(ValueError):
    """A persisted session file is corrupt or structurally invalid."""


@dataclass
class InteractionRecord:
    """One full request/response(/acceptance) event, kept for corpus collection."""

    request_id: str
    session_id: str
    kind: TaskKind
    doc_version_before: int
    prompt_turns: list[dict]
    prompt_flat: str
    params: GenerationParams
    raw_candidates: list[str]
    candidates: list[Candidate]
    timestamp: str
    accepted_index: int | None = None

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "session_id": self.session_id,
            "kind": self.kind.value,
            "doc_version_before": self.doc_version_before,
            "prompt_turns": self.prompt_turns,
            "prompt_flat": self.prompt_flat,
            "params": _params_to_dict(self.params),
            "raw_candidates": list(self.raw_candidates),
            "candidates": [_candidate_to_dict(c) for c in self.candidates],
            "accepted_index": self.accepted_index,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InteractionRecord":
        return cls(
            request_id=data["request_id"],
            session_id=data["session_id"],
            kind=TaskKind(data["kind"]),
            doc_version_before=data["doc_version_before"],
            prompt_turns=data["prompt_turns"],
            prompt_flat=data["prompt_flat"],
            params=_params_from_dict(data["params"]),
            raw_candidates=list(data["raw_candidates"]),
            candidates=[_candidate_from_dict(c) for c in data["candidates"]],
            accepted_index=data["accepted_index"],
            timestamp=data["timestamp"],
        )


@dataclass
class Session:
    session_id: str
    doc: StoryDocument
    created_at: str
    updated_at: str
    backend: BackendDescriptor
    params: GenerationParams
    records: list[InteractionRecord] = field(default_factory=list)
    pending: dict[str, tuple[PromptRequest, list[Candidate]]] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _params_to_dict(params: GenerationParams) -> dict:
    return {
        "top_k": params.top_k,
        "num_candidates": params.num_candidates,
        "max_response_chars": params.max_response_chars,
        "seed": params.seed,
        "timeout_ms": params.timeout_ms,
    }


def _params_from_dict(data: dict) -> GenerationParams:
    return GenerationParams(
        top_k=data["top_k"],
        num_candidates=data["num_candidates"],
        max_response_chars=data["max_response_chars"],
        seed=data["seed"],
        timeout_ms=data["timeout_ms"],
    )


def _candidate_to_dict(cand: Candidate) -> dict:
    return {
        "text": cand.text,
        "backend_id": cand.backend_id,
        "raw_text": cand.raw_text,
        "annotations": cand.annotations,
    }


def _candidate_from_dict(data: dict) -> Candidate:
    return Candidate(
        text=data["text"],
        backend_id=data["backend_id"],
        raw_text=data["raw_text"],
        annotations=data["annotations"],
    )


def _request_to_dict(req: PromptRequest) -> dict:
    return {
        "request_id": req.request_id,
        "kind": req.kind.value,
        "doc_version": req.doc_version,
        "context": [{"role": t.role.value, "text": t.text} for t in req.context.turns],
        "flat_prompt": req.flat_prompt,
        "story_text": req.story_text,
        "target": [req.target.start, req.target.end] if req.target else None,
        "n_words": req.n_words,
        "tone": req.tone,
        "instruction": req.instruction,
    }


def _request_from_dict(data: dict) -> PromptRequest:
    target = data["target"]
    return PromptRequest(
        request_id=data["request_id"],
        kind=TaskKind(data["kind"]),
        doc_version=data["doc_version"],
        context=ConversationContext(
            tuple(Turn(Role(t["role"]), t["text"]) for t in data["context"])
        ),
        flat_prompt=data["flat_prompt"],
        story_text=data["story_text"],
        target=Selection(target[0], target[1]) if target else None,
        n_words=data["n_words"],
        tone=data["tone"],
        instruction=data["instruction"],
    )


def _spans_to_dicts(doc: StoryDocument) -> list[dict]:
    out = []
    for span in doc.spans:
        entry = {"text": span.text, "kind": span.provenance.kind.value}
        if span.provenance.request_id is not None:
            entry["request_id"] = span.provenance.request_id
        out.append(entry)
    return out


def _spans_from_dicts(data: list[dict]) -> tuple[Span, ...]:
    spans = []
    for entry in data:
        prov = Provenance(AuthorKind(entry["kind"]), entry.get("request_id"))
        spans.append(Span(entry["text"], prov))
    return tuple(spans)


def annotated_export(doc: StoryDocument) -> dict:
    """Span list with absolute offsets and provenance, plus the full text."""
    spans = []
    pos = 0
    for span in doc.spans:
        entry: dict = {"start": pos, "end": pos + len(span.text), "kind": span.provenance.kind.value}
        if span.provenance.request_id is not None:
            entry["request_id"] = span.provenance.request_id
        spans.append(entry)
        pos += len(span.text)
    return {"text": doc.full_text(), "spans": spans}


class SessionService:
    """Many concurrent sessions, each with a single logical writer."""

    def __init__(
        self,
        backends: dict[str, BackendDescriptor] | None = None,
        default_backend: str = "mock",
        default_params: GenerationParams | None = None,
        templates: TemplateLibrary | None = None,
        rules: tuple[MetaRule, ...] | None = None,
        data_dir: str | Path | None = None,
        id_factory: Callable[[], str] | None = None,
    ):
        self._backends = backends or {"mock": MOCK_BACKEND, "mock-flat": MOCK_FLAT_BACKEND}
        if default_backend not in self._backends:
            raise UnknownBackendError(f"unknown backend id '{default_backend}'")
        self._default_backend = default_backend
        self._default_params = default_params or GenerationParams()
        self._templates = templates
        self._rules = rules
        self._data_dir = Path(data_dir) if data_dir is not None else None
        self._id_factory = id_factory or (lambda: uuid.uuid4().hex)
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()
        if self._data_dir is not None:
            self._data_dir.mkdir(parents=True, exist_ok=True)

    # -- lifecycle ---------------------------------------------------------

    def create_session(
        self,
        backend: str | None = None,
        params: GenerationParams | None = None,
    ) -> Session:
        backend_id = backend if backend is not None else self._default_backend
        if backend_id not in self._backends:
            raise UnknownBackendError(f"unknown backend id '{backend_id}'")
        now = _now()
        session = Session(
            session_id=self._id_factory(),
            doc=StoryDocument.empty(),
            created_at=now,
            updated_at=now,
            backend=self._backends[backend_id],
            params=params or self._default_params,
        )
        with self._registry_lock:
            self._sessions[session.session_id] = session
        self._persist(session)
        return session

    def get_session(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise SessionNotFoundError(session_id) from None

    def session_ids(self) -> list[str]:
        return sorted(self._sessions)

    # -- mutations ---------------------------------------------------------

    def edit(self, session_id: str, sel: Selection, text: str, base_version: int) -> int:
        """Human typing path; returns the new document version."""
        session = self.get_session(session_id)
        with session.lock:
            if base_version != session.doc.version:
                raise VersionConflictError(session.doc.version)
            session.doc = session.doc.replace_range(sel, text, HUMAN)
            session.updated_at = _now()
            self._persist(session)
            return session.doc.version

    def suggest(
        self,
        session_id: str,
        kind: TaskKind,
        sel: Selection | None = None,
        n_words: int | None = None,
        tone: str | None = None,
        instruction: str | None = None,
    ) -> tuple[str, list[Candidate]]:
        """Build the request, call the backend, post-process, and log.

        Never mutates the document; the backend call runs outside the
        session's write lock.
        """
        session = self.get_session(session_id)
        doc = session.doc
        req = self._build_request(doc, kind, sel, n_words, tone, instruction)
        raw = generate(req, session.params, session.backend)
        annotated = pipeline(raw, req, self._rules)
        record = InteractionRecord(
            request_id=req.request_id,
            session_id=session_id,
            kind=kind,
            doc_version_before=doc.version,
            prompt_turns=[{"role": t.role.value, "text": t.text} for t in req.context.turns],
            prompt_flat=req.flat_prompt,
            params=session.params,
            raw_candidates=[c.raw_text for c in raw],
            candidates=annotated,
            timestamp=_now(),
        )
        with session.lock:
            session.records.append(record)
            session.pending[req.request_id] = (req, annotated)
            self._persist(session)
        self._append_corpus({"event": "suggest", **record.to_dict()})
        return req.request_id, annotated

    def _build_request(
        self,
        doc: StoryDocument,
        kind: TaskKind,
        sel: Selection | None,
        n_words: int | None,
        tone: str | None,
        instruction: str | None,
    ) -> PromptRequest:
        request_id = self._id_factory()
        if kind is TaskKind.CONTINUATION:
            return continuation_request(doc, self._templates, request_id=request_id)
        if kind is TaskKind.INFILL:
            if sel is None:
                raise ValueError("infill requires a selection")
            return infill_request(doc, sel, n_words, self._templates, request_id=request_id)
        if kind is TaskKind.ELABORATE:
            if sel is None:
                raise ValueError("elaborate requires a selection")
            return elaborate_request(doc, sel, self._templates, request_id=request_id)
        if kind is TaskKind.REWRITE:
            return rewrite_request(doc, sel, tone or "", self._templates, request_id=request_id)
        return custom_request(doc, instruction or "", sel, self._templates, request_id=request_id)

    def accept(
        self,
        session_id: str,
        request_id: str,
        candidate_index: int,
        base_version: int,
    ) -> int:
        """Apply one suggested candidate; single-use per request."""
        session = self.get_session(session_id)
        with session.lock:
            if request_id not in session.pending:
                raise UnknownRequestError(request_id)
            req, candidates = session.pending[request_id]
            record = next(r for r in session.records if r.request_id == request_id)
            if record.accepted_index is not None:
                raise RequestConsumedError(f"request {request_id} was already accepted")
            if base_version != session.doc.version:
                raise VersionConflictError(session.doc.version)
            if not 0 <= candidate_index < len(candidates):
                raise IndexError(
                    f"candidate index {candidate_index} out of range 0..{len(candidates) - 1}"
                )
            session.doc = apply_candidate(session.doc, req, candidates[candidate_index].text)
            record.accepted_index = candidate_index
            session.updated_at = _now()
            self._persist(session)
        self._append_corpus(
            {
                "event": "accept",
                "session_id": session_id,
                "request_id": request_id,
                "accepted_index": candidate_index,
                "timestamp": _now(),
            }
        )
        return session.doc.version

    # -- reads -------------------------------------------------------------

    def export_plain(self, session_id: str) -> str:
        return self.get_session(session_id).doc.full_text()

    def export_annotated(self, session_id: str) -> dict:
        return annotated_export(self.get_session(session_id).doc)

    def records(self, session_id: str) -> list[InteractionRecord]:
        return list(self.get_session(session_id).records)

    # -- persistence -------------------------------------------------------

    def _session_path(self, session_id: str) -> Path:
        assert self._data_dir is not None
        return self._data_dir / f"session-{session_id}.json"

    def _persist(self, session: Session) -> None:
        if self._data_dir is None:
            return
        self.save_session(session.session_id)

    def save_session(self, session_id: str) -> Path:
        if self._data_dir is None:
            raise ValueError("service has no data_dir configured")
        session = self.get_session(session_id)
        payload = {
            "session": {
                "session_id": session.session_id,
                "created_at": session.created_at,
                "updated_at": session.updated_at,
                "version": session.doc.version,
                "backend": {
                    "id": session.backend.id,
                    "format": session.backend.format.value,
                    "endpoint": session.backend.endpoint,
                },
                "params": _params_to_dict(session.params),
            },
            "spans": _spans_to_dicts(session.doc),
            "records": [r.to_dict() for r in session.records],
            "pending": [
                {"request": _request_to_dict(req), "candidates": [_candidate_to_dict(c) for c in cands]}
                for req, cands in session.pending.values()
            ],
        }
        path = self._session_path(session_id)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, ensure_ascii=False, indent=2), encoding="utf-8")
        tmp.replace(path)
        return path

    def load_session(self, session_id: str) -> Session:
        """Restore a session from disk; a corrupt file never yields a partial
        session."""
        if self._data_dir is None:
            raise ValueError("service has no data_dir configured")
        path = self._session_path(session_id)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
            meta = payload["session"]
            backend = BackendDescriptor(
                id=meta["backend"]["id"],
                format=PromptFormat(meta["backend"]["format"]),
                endpoint=meta["backend"]["endpoint"],
            )
            doc = StoryDocument(_spans_from_dicts(payload["spans"]), meta["version"])
            session = Session(
                session_id=meta["session_id"],
                doc=doc,
                created_at=meta["created_at"],
                updated_at=meta["updated_at"],
                backend=backend,
                params=_params_from_dict(meta["params"]),
                records=[InteractionRecord.from_dict(r) for r in payload["records"]],
                pending={
                    p["request"]["request_id"]: (
                        _request_from_dict(p["request"]),
                        [_candidate_from_dict(c) for c in p["candidates"]],
                    )
                    for p in payload["pending"]
                },
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, IndexError) as exc:
            raise IntegrityError(f"session file {path.name} is corrupt: {exc}") from exc
        with self._registry_lock:
            self._sessions[session.session_id] = session
        return session

    def _append_corpus(self, event: dict) -> None:
        if self._data_dir is None:
            return
        with open(self._data_dir / "interactions.jsonl", "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")
