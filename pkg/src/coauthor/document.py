"""Story document model: provenance-tagged text spans with immutable updates.

Every piece of story text is attributed either to the human writer or to a
specific generation request, and that attribution survives arbitrary edits.
Offsets are in code points, never bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class AuthorKind(str, Enum):
    HUMAN = "human"
    MODEL = "model"


class RangeError(ValueError):
    """Selection lies outside the document bounds."""


@dataclass(frozen=True)
class Provenance:
    """Who wrote a span: the human, or the model via a specific request."""

    kind: AuthorKind
    request_id: str | None = None

    def __post_init__(self) -> None:
        if self.kind is AuthorKind.MODEL and not self.request_id:
            raise ValueError("model provenance requires a request_id")
        if self.kind is AuthorKind.HUMAN and self.request_id is not None:
            raise ValueError("human provenance never carries a request_id")


HUMAN = Provenance(AuthorKind.HUMAN)


def model_provenance(request_id: str) -> Provenance:
    return Provenance(AuthorKind.MODEL, request_id)


@dataclass(frozen=True)
class Span:
    text: str
    provenance: Provenance

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("spans must be non-empty")


@dataclass(frozen=True)
class Selection:
    """Half-open character range [start, end); start == end is a caret."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise RangeError(f"invalid selection [{self.start}, {self.end})")

    @property
    def is_caret(self) -> bool:
        return self.start == self.end

    def __len__(self) -> int:
        return self.end - self.start


def _canonical(spans: tuple[Span, ...]) -> tuple[Span, ...]:
    """Drop empty spans and merge adjacent spans with identical provenance."""
    merged: list[Span] = []
    for span in spans:
        if not span.text:
            continue
        if merged and merged[-1].provenance == span.provenance:
            merged[-1] = Span(merged[-1].text + span.text, span.provenance)
        else:
            merged.append(span)
    return tuple(merged)


def _slice(spans: tuple[Span, ...], start: int, end: int) -> tuple[Span, ...]:
    """Sub-spans covering the absolute range [start, end), provenance kept."""
    out: list[Span] = []
    pos = 0
    for span in spans:
        span_end = pos + len(span.text)
        lo = max(start, pos)
        hi = min(end, span_end)
        if lo < hi:
            out.append(Span(span.text[lo - pos : hi - pos], span.provenance))
        pos = span_end
        if pos >= end:
            break
    return tuple(out)


@dataclass(frozen=True)
class StoryDocument:
    """Immutable story value; every mutation returns a new, higher version."""

    spans: tuple[Span, ...] = ()
    version: int = 0

    @classmethod
    def empty(cls) -> "StoryDocument":
        return cls((), 0)

    @property
    def length(self) -> int:
        return sum(len(s.text) for s in self.spans)

    def full_text(self) -> str:
        return "".join(s.text for s in self.spans)

    def _check(self, sel: Selection) -> None:
        if sel.end > self.length:
            raise RangeError(
                f"selection [{sel.start}, {sel.end}) exceeds document length {self.length}"
            )

    def selected_text(self, sel: Selection) -> str:
        self._check(sel)
        return self.full_text()[sel.start : sel.end]

    def replace_range(self, sel: Selection, text: str, prov: Provenance) -> "StoryDocument":
        """Replace [start, end) with `text` attributed to `prov`.

        Characters outside the range keep their original provenance.
        """
        self._check(sel)
        before = _slice(self.spans, 0, sel.start)
        after = _slice(self.spans, sel.end, self.length)
        middle = (Span(text, prov),) if text else ()
        return StoryDocument(_canonical(before + middle + after), self.version + 1)


def word_count(text: str) -> int:
    """Number of maximal runs of non-whitespace characters."""
    return len(text.split())
