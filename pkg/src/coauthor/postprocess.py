"""Candidate post-processing: meta-text flagging, sentence trimming,
word-count annotation, and order-preserving deduplication.

Models sometimes answer a writing request by talking about the story
(questions, commentary) instead of contributing story text. Such candidates
are flagged, never dropped: the editor shows them separately so the writer
can use them to refine the prompt.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .backends import Candidate
from .document import word_count
from .tasks import PromptRequest, TaskKind


class RuleKind(str, Enum):
    SUBSTRING = "substring"
    REGEX_LITE = "regex-lite"


@dataclass(frozen=True)
class MetaRule:
    rule_id: str
    kind: RuleKind
    pattern: str


@dataclass(frozen=True)
class MetaTextVerdict:
    is_meta: bool
    matched_rules: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.is_meta != bool(self.matched_rules):
            raise ValueError("is_meta must mirror matched_rules")


class RulesParseError(ValueError):
    """Rules file line does not match 'RULE <id>: <match-kind> <pattern>'."""


_RULE_RE = re.compile(r"^RULE\s+([\w-]+):\s+(substring|regex-lite)\s+(.+)$")


def parse_rules(text: str) -> tuple[MetaRule, ...]:
    rules: list[MetaRule] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        match = _RULE_RE.match(stripped)
        if match is None:
            raise RulesParseError(f"line {lineno}: malformed rule: {stripped!r}")
        rules.append(MetaRule(match.group(1), RuleKind(match.group(2)), match.group(3)))
    return tuple(rules)


def load_rules(path: str | Path) -> tuple[MetaRule, ...]:
    return parse_rules(Path(path).read_text(encoding="utf-8"))


_default_rules: tuple[MetaRule, ...] | None = None


def default_rules() -> tuple[MetaRule, ...]:
    global _default_rules
    if _default_rules is None:
        content = (resources.files(__package__) / "meta_rules.txt").read_text(encoding="utf-8")
        _default_rules = parse_rules(content)
    return _default_rules


_SENTENCE_RE = re.compile(r"[^.!?]*[.!?]")


def _question_sentences(text: str) -> list[str]:
    return [chunk for chunk in _SENTENCE_RE.findall(text) if chunk.endswith("?")]


def _rule_matches(rule: MetaRule, text: str) -> bool:
    lowered = text.lower()
    if rule.kind is RuleKind.SUBSTRING:
        return rule.pattern.lower() in lowered
    # regex-lite: a trailing '?' anchors the literal to a question sentence
    if rule.pattern.endswith("?"):
        needle = rule.pattern[:-1].lower()
        return any(needle in q.lower() for q in _question_sentences(text))
    return rule.pattern.lower() in lowered


def detect_meta(
    candidate_text: str,
    story_text: str = "",
    rules: tuple[MetaRule, ...] | None = None,
) -> MetaTextVerdict:
    """Flag text that talks about the story rather than telling it.

    `story_text` is accepted for rule kinds that may want to compare against
    the story; the built-in rules match on the candidate alone.
    """
    del story_text
    matched = tuple(
        rule.rule_id for rule in (rules if rules is not None else default_rules())
        if _rule_matches(rule, candidate_text)
    )
    return MetaTextVerdict(bool(matched), matched)


def _dedupe_key(text: str) -> str:
    return " ".join(text.split()).casefold()


def dedupe(candidates: list[Candidate]) -> list[Candidate]:
    """Keep the first candidate per whitespace-normalized, case-folded text."""
    seen: set[str] = set()
    out: list[Candidate] = []
    for cand in candidates:
        key = _dedupe_key(cand.text)
        if key in seen:
            continue
        seen.add(key)
        out.append(cand)
    return out


_TERMINATORS = ".!?"
_CLOSING_QUOTES = "\"'”’"
_SENTENCE_END_RE = re.compile(r"[.!?][\"'”’]*")


def trim_to_sentence(text: str) -> tuple[str, bool]:
    """Drop a trailing incomplete sentence; keep the text if none is complete.

    The result is always a prefix of the input. A terminator may be followed
    by closing quotes and still count as the end of a sentence.
    """
    i = len(text) - 1
    while i >= 0 and text[i] in _CLOSING_QUOTES:
        i -= 1
    if i >= 0 and text[i] in _TERMINATORS:
        return text, False
    last = -1
    for match in _SENTENCE_END_RE.finditer(text):
        last = match.end()
    if last == -1:
        return text, False
    return text[:last], True


def annotate_word_count(candidate: Candidate, target: int) -> Candidate:
    """Record how far the candidate is from the requested word count.

    Mismatches are surfaced, never rejected.
    """
    candidate.annotations["word_count_delta"] = word_count(candidate.text) - target
    return candidate


def pipeline(
    raw: list[Candidate],
    req: PromptRequest,
    rules: tuple[MetaRule, ...] | None = None,
) -> list[Candidate]:
    """Clean and annotate raw candidates, preserving their order.

    Stages: strip whitespace, drop empties, flag meta text (judged on the
    untrimmed text so re-running the pipeline is a no-op), trim continuations
    to a sentence boundary, annotate infill word counts, dedupe.
    """
    out: list[Candidate] = []
    for cand in raw:
        text = cand.text.strip()
        if not text:
            continue
        base = cand.raw_text.strip()
        verdict = detect_meta(base, req.story_text, rules)
        if req.kind is TaskKind.CONTINUATION:
            text, _ = trim_to_sentence(text)
        annotated = Candidate(
            text=text,
            backend_id=cand.backend_id,
            raw_text=cand.raw_text,
            annotations={
                "meta_text": verdict.is_meta,
                "matched_rules": list(verdict.matched_rules),
                "trimmed": text != base,
            },
        )
        if req.kind is TaskKind.INFILL and req.n_words is not None:
            annotate_word_count(annotated, req.n_words)
        out.append(annotated)
    return dedupe(out)
