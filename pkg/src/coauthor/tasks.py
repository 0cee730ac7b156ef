"""Task registry: builds bound prompt requests for each writing intent and
applies accepted candidates back into the story document."""

from __future__ import annotations

import re
import uuid
from dataclasses import dataclass
from enum import Enum

from .document import Selection, StoryDocument, model_provenance, word_count
from .prompts import (
    ConversationContext,
    TaskTemplate,
    TemplateLibrary,
    assemble_dialog_prompt,
    render_final_turn,
    serialize_flat,
)


class TaskKind(str, Enum):
    CONTINUATION = "continuation"
    INFILL = "infill"
    ELABORATE = "elaborate"
    REWRITE = "rewrite"
    CUSTOM = "custom"


BLANK_MARKER = "______"


class TaskPreconditionError(ValueError):
    """The document/selection state does not admit the requested task."""


class StaleRequestError(RuntimeError):
    """The document changed since the request was built."""

    def __init__(self, expected_version: int, current_version: int):
        super().__init__(
            f"request built against version {expected_version}, document is at {current_version}"
        )
        self.expected_version = expected_version
        self.current_version = current_version


@dataclass(frozen=True)
class PromptRequest:
    """A fully-bound, serializable generation request."""

    request_id: str
    kind: TaskKind
    doc_version: int
    context: ConversationContext
    flat_prompt: str
    story_text: str
    target: Selection | None = None
    n_words: int | None = None
    tone: str | None = None
    instruction: str | None = None


_default_library: TemplateLibrary | None = None


def _library(templates: TemplateLibrary | None) -> TemplateLibrary:
    global _default_library
    if templates is not None:
        return templates
    if _default_library is None:
        _default_library = TemplateLibrary.builtin()
    return _default_library


def _build(
    kind: TaskKind,
    template: TaskTemplate,
    binding: dict[str, str],
    doc: StoryDocument,
    **fields,
) -> PromptRequest:
    final = render_final_turn(template, binding)
    return PromptRequest(
        request_id=fields.pop("request_id", None) or uuid.uuid4().hex,
        kind=kind,
        doc_version=doc.version,
        context=assemble_dialog_prompt(template, final),
        flat_prompt=serialize_flat(template, binding),
        story_text=binding["STORY"],
        **fields,
    )


def continuation_request(
    doc: StoryDocument,
    templates: TemplateLibrary | None = None,
    request_id: str | None = None,
) -> PromptRequest:
    story = doc.full_text()
    if not story:
        raise TaskPreconditionError("cannot continue an empty story")
    template = _library(templates).get("continuation")
    return _build(
        TaskKind.CONTINUATION, template, {"STORY": story}, doc, request_id=request_id
    )


def blank_embedded_story(text: str, sel: Selection) -> str:
    """Replace [start, end) with the blank marker, normalizing to a single
    space on each side of it."""
    return f"{text[: sel.start].rstrip()} {BLANK_MARKER} {text[sel.end :].lstrip()}"


def infill_request(
    doc: StoryDocument,
    sel: Selection,
    n_words: int | None = None,
    templates: TemplateLibrary | None = None,
    request_id: str | None = None,
) -> PromptRequest:
    if sel.is_caret:
        raise TaskPreconditionError("infill requires a non-empty selection")
    selected = doc.selected_text(sel)
    count = n_words if n_words is not None else word_count(selected)
    if count < 1:
        raise TaskPreconditionError("infill word count must be at least 1")
    embedded = blank_embedded_story(doc.full_text(), sel)
    template = _library(templates).get("infill")
    return _build(
        TaskKind.INFILL,
        template,
        {"STORY": embedded, "N_WORDS": str(count)},
        doc,
        target=sel,
        n_words=count,
        request_id=request_id,
    )


def elaborate_request(
    doc: StoryDocument,
    sel: Selection,
    templates: TemplateLibrary | None = None,
    request_id: str | None = None,
) -> PromptRequest:
    if sel.is_caret:
        raise TaskPreconditionError("elaborate requires a non-empty selection")
    selected = doc.selected_text(sel)
    template = _library(templates).get("elaborate")
    return _build(
        TaskKind.ELABORATE,
        template,
        {"STORY": doc.full_text(), "SELECTION": selected},
        doc,
        target=sel,
        request_id=request_id,
    )


def rewrite_request(
    doc: StoryDocument,
    sel: Selection | None,
    tone: str,
    templates: TemplateLibrary | None = None,
    request_id: str | None = None,
) -> PromptRequest:
    if not tone.strip():
        raise TaskPreconditionError("rewrite requires a non-empty tone")
    if sel is not None and sel.is_caret:
        raise TaskPreconditionError("rewrite selection must be non-empty")
    # no selection means the whole document is the rewrite target
    target = sel if sel is not None else Selection(0, doc.length)
    text = doc.selected_text(target)
    template = _library(templates).get("rewrite")
    return _build(
        TaskKind.REWRITE,
        template,
        {"STORY": text, "TONE": tone},
        doc,
        target=target,
        tone=tone,
        request_id=request_id,
    )


def custom_request(
    doc: StoryDocument,
    instruction: str,
    sel: Selection | None = None,
    templates: TemplateLibrary | None = None,
    request_id: str | None = None,
) -> PromptRequest:
    if not instruction.strip():
        raise TaskPreconditionError("custom task requires a non-empty instruction")
    template = _library(templates).get("custom")
    return _build(
        TaskKind.CUSTOM,
        template,
        {"STORY": doc.full_text(), "INSTRUCTION": instruction},
        doc,
        target=sel,
        instruction=instruction,
        request_id=request_id,
    )


_SENTENCE_END_RE = re.compile(r"[.!?][\"'”’]*")


def _sentence_end_after(text: str, pos: int) -> int:
    """Offset just past the end of the sentence containing `pos`.

    A sentence ends at '.', '!' or '?' (plus any closing quotes) followed by
    whitespace or end of text. Falls back to the end of the text.
    """
    for match in _SENTENCE_END_RE.finditer(text):
        end = match.end()
        if end < pos:
            continue
        if end >= len(text) or text[end].isspace():
            return end
    return len(text)


def _append_text(doc: StoryDocument, text: str) -> tuple[Selection, str]:
    full = doc.full_text()
    if full and not full[-1].isspace() and not text[:1].isspace():
        text = " " + text
    return Selection(doc.length, doc.length), text


def apply_candidate(doc: StoryDocument, req: PromptRequest, candidate_text: str) -> StoryDocument:
    """Splice an accepted candidate into the document with model provenance.

    Where the text lands depends on the task: continuations and custom
    responses are appended, infills and rewrites replace the target range,
    and elaborations are inserted after the sentence containing the target.
    """
    if req.doc_version != doc.version:
        raise StaleRequestError(req.doc_version, doc.version)
    if not candidate_text:
        raise ValueError("cannot apply an empty candidate")
    prov = model_provenance(req.request_id)

    if req.kind in (TaskKind.CONTINUATION, TaskKind.CUSTOM):
        where, text = _append_text(doc, candidate_text)
        return doc.replace_range(where, text, prov)

    if req.kind in (TaskKind.INFILL, TaskKind.REWRITE):
        assert req.target is not None
        return doc.replace_range(req.target, candidate_text, prov)

    # elaborate: insert after the sentence containing the selection
    assert req.target is not None
    full = doc.full_text()
    at = _sentence_end_after(full, req.target.end)
    text = candidate_text
    if at > 0 and not full[at - 1].isspace() and not text[:1].isspace():
        text = " " + text
    return doc.replace_range(Selection(at, at), text, prov)
