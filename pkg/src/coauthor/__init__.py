"""Human-AI collaborative story writing: prompt orchestration, provenance
tracking, and an HTTP session service."""

from .backends import BackendDescriptor, Candidate, GenerationParams, PromptFormat, generate
from .document import (
    HUMAN,
    AuthorKind,
    Provenance,
    RangeError,
    Selection,
    Span,
    StoryDocument,
    model_provenance,
    word_count,
)
from .postprocess import detect_meta, pipeline
from .prompts import TaskTemplate, TemplateLibrary, Turn
from .service import SessionService
from .tasks import (
    TaskKind,
    apply_candidate,
    continuation_request,
    custom_request,
    elaborate_request,
    infill_request,
    rewrite_request,
)

__all__ = [
    "AuthorKind",
    "BackendDescriptor",
    "Candidate",
    "GenerationParams",
    "HUMAN",
    "PromptFormat",
    "Provenance",
    "RangeError",
    "Selection",
    "SessionService",
    "Span",
    "StoryDocument",
    "TaskKind",
    "TaskTemplate",
    "TemplateLibrary",
    "Turn",
    "apply_candidate",
    "continuation_request",
    "custom_request",
    "detect_meta",
    "elaborate_request",
    "generate",
    "infill_request",
    "model_provenance",
    "pipeline",
    "rewrite_request",
    "word_count",
]
