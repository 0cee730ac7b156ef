"""Few-shot task templates: loading, slot binding, and prompt serialization.

A template is a short staged conversation (the few-shot examples) plus a
final-turn pattern with named slots. The same template serializes two ways:
as role-tagged turns for a dialog model, or as a flat text block for a
general-purpose LM that simply continues its input.

Template file grammar (UTF-8 plain text):

    # comment lines start with '#'
    WRITER: first line of a writer turn
    continuation lines belong to the same turn
    ASSISTANT: the paired assistant turn
    FINAL: final-turn pattern with {STORY}-style placeholders
    FLAT: optional override pattern used only for flat serialization

Turn bodies are kept byte-exact except for their trailing newline.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

PLACEHOLDER_NAMES = frozenset({"STORY", "SELECTION", "N_WORDS", "TONE", "INSTRUCTION"})

_PLACEHOLDER_RE = re.compile(r"\{([A-Z_]+)\}")
_MARKERS = ("WRITER:", "ASSISTANT:", "FINAL:", "FLAT:")


class TemplateParseError(ValueError):
    """Template file violates the grammar; message names the offending line."""


class BindingError(ValueError):
    """Slot binding does not cover the template's required slots exactly."""


class RoleError(ValueError):
    """A turn appears with the wrong role for its position."""


class Role(str, Enum):
    WRITER = "writer"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class Turn:
    role: Role
    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("turns must have non-empty text")


def _placeholders(pattern: str) -> frozenset[str]:
    return frozenset(_PLACEHOLDER_RE.findall(pattern))


@dataclass(frozen=True)
class TaskTemplate:
    """A staged few-shot conversation plus the pattern for the final turn.

    `flat_pattern`, when set, replaces `final_turn_pattern` in the flat
    serialization; a dialog model may need wrapper text that a plain LM
    does not.
    """

    name: str
    staged_context: tuple[Turn, ...]
    final_turn_pattern: str
    required_slots: frozenset[str]
    flat_pattern: str | None = None

    def __post_init__(self) -> None:
        if not self.final_turn_pattern:
            raise ValueError("final_turn_pattern must be non-empty")
        if _placeholders(self.final_turn_pattern) != self.required_slots:
            raise ValueError("required_slots must equal the final pattern's placeholders")
        _validate_staging(self.staged_context)

    @classmethod
    def create(
        cls,
        name: str,
        staged_context: tuple[Turn, ...],
        final_turn_pattern: str,
        flat_pattern: str | None = None,
    ) -> "TaskTemplate":
        return cls(
            name=name,
            staged_context=staged_context,
            final_turn_pattern=final_turn_pattern,
            required_slots=_placeholders(final_turn_pattern),
            flat_pattern=flat_pattern,
        )


def _validate_staging(staged: tuple[Turn, ...]) -> None:
    expected = Role.WRITER
    for turn in staged:
        if turn.role is not expected:
            raise ValueError(f"staged turns must alternate writer/assistant, got {turn.role.value}")
        expected = Role.ASSISTANT if expected is Role.WRITER else Role.WRITER
    if staged and staged[-1].role is not Role.ASSISTANT:
        raise ValueError("staged context must end with an assistant turn")


@dataclass(frozen=True)
class ConversationContext:
    """Ordered turns ending with the writer turn the model is asked to answer."""

    turns: tuple[Turn, ...]

    def __post_init__(self) -> None:
        if not self.turns:
            raise ValueError("conversation context cannot be empty")
        if self.turns[-1].role is not Role.WRITER:
            raise ValueError("conversation context must end with a writer turn")


def parse_template(text: str, name: str = "template") -> TaskTemplate:
    """Parse template file content; raises TemplateParseError naming the line."""
    sections: list[tuple[str, int, list[str]]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#"):
            continue
        marker = next((m for m in _MARKERS if line.startswith(m)), None)
        if marker is not None:
            rest = line[len(marker) :]
            if rest.startswith(" "):
                rest = rest[1:]
            sections.append((marker, lineno, [rest]))
        elif sections:
            sections[-1][2].append(line)
        elif line.strip():
            raise TemplateParseError(f"line {lineno}: text before any turn marker")

    staged: list[Turn] = []
    final_pattern: str | None = None
    final_line = 0
    flat_pattern: str | None = None

    for marker, lineno, lines in sections:
        # bodies are byte-exact except for trailing newlines (blank separator lines)
        body = "\n".join(lines).rstrip("\n")
        if marker in ("WRITER:", "ASSISTANT:"):
            if final_pattern is not None:
                raise TemplateParseError(f"line {lineno}: turn after FINAL section")
            if not body:
                raise TemplateParseError(f"line {lineno}: empty turn body")
            role = Role.WRITER if marker == "WRITER:" else Role.ASSISTANT
            staged.append(Turn(role, body))
        elif marker == "FINAL:":
            if final_pattern is not None:
                raise TemplateParseError(f"line {lineno}: duplicate FINAL section")
            if not body:
                raise TemplateParseError(f"line {lineno}: empty FINAL pattern")
            final_pattern = body
            final_line = lineno
        else:  # FLAT:
            if flat_pattern is not None:
                raise TemplateParseError(f"line {lineno}: duplicate FLAT section")
            if not body:
                raise TemplateParseError(f"line {lineno}: empty FLAT pattern")
            flat_pattern = body

    if final_pattern is None:
        raise TemplateParseError("template has no FINAL section")

    for pattern, label, lineno in ((final_pattern, "FINAL", final_line), (flat_pattern, "FLAT", 0)):
        if pattern is None:
            continue
        unknown = _placeholders(pattern) - PLACEHOLDER_NAMES
        if unknown:
            where = f"line {lineno}: " if lineno else ""
            raise TemplateParseError(
                f"{where}unknown placeholder(s) in {label} pattern: {', '.join(sorted(unknown))}"
            )
    if flat_pattern is not None:
        extra = _placeholders(flat_pattern) - _placeholders(final_pattern)
        if extra:
            raise TemplateParseError(
                f"FLAT pattern uses slots absent from FINAL: {', '.join(sorted(extra))}"
            )

    expected = Role.WRITER
    for turn, (marker, lineno, _) in zip(staged, (s for s in sections if s[0] in ("WRITER:", "ASSISTANT:"))):
        if turn.role is not expected:
            raise TemplateParseError(
                f"line {lineno}: expected {expected.value} turn, got {turn.role.value}"
            )
        expected = Role.ASSISTANT if expected is Role.WRITER else Role.WRITER
    if staged and staged[-1].role is not Role.ASSISTANT:
        raise TemplateParseError("staged context must end with an assistant turn")

    return TaskTemplate(
        name=name,
        staged_context=tuple(staged),
        final_turn_pattern=final_pattern,
        required_slots=_placeholders(final_pattern),
        flat_pattern=flat_pattern,
    )


def load_template(path: str | Path) -> TaskTemplate:
    path = Path(path)
    return parse_template(path.read_text(encoding="utf-8"), name=path.stem)


def serialize_template(template: TaskTemplate) -> str:
    """Inverse of parse_template, up to comments and blank separator lines."""
    lines = []
    for turn in template.staged_context:
        marker = "WRITER:" if turn.role is Role.WRITER else "ASSISTANT:"
        lines.append(f"{marker} {turn.text}")
    lines.append(f"FINAL: {template.final_turn_pattern}")
    if template.flat_pattern is not None:
        lines.append(f"FLAT: {template.flat_pattern}")
    return "\n".join(lines) + "\n"


def _check_binding(template: TaskTemplate, binding: dict[str, str]) -> None:
    missing = template.required_slots - binding.keys()
    extra = binding.keys() - template.required_slots
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing: {', '.join(sorted(missing))}")
        if extra:
            parts.append(f"extra: {', '.join(sorted(extra))}")
        raise BindingError(f"binding does not match template '{template.name}' ({'; '.join(parts)})")


def _substitute(pattern: str, binding: dict[str, str]) -> str:
    # single pass: bound values are embedded verbatim, never re-scanned
    return _PLACEHOLDER_RE.sub(lambda m: binding[m.group(1)], pattern)


def render_final_turn(template: TaskTemplate, binding: dict[str, str]) -> Turn:
    """Bind the final-turn pattern into the writer turn sent to the model."""
    _check_binding(template, binding)
    return Turn(Role.WRITER, _substitute(template.final_turn_pattern, binding))


def assemble_dialog_prompt(template: TaskTemplate, final: Turn) -> ConversationContext:
    """Append the bound final turn to the template's staged conversation."""
    if final.role is not Role.WRITER:
        raise RoleError("final turn must have the writer role")
    return ConversationContext(template.staged_context + (final,))


def serialize_flat(template: TaskTemplate, binding: dict[str, str]) -> str:
    """One text block: each staged turn on its own line, then the final line.

    Uses `flat_pattern` when the template defines one, so tasks that need a
    conversational wrapper can still prime a plain LM with bare text.
    """
    _check_binding(template, binding)
    pattern = template.flat_pattern if template.flat_pattern is not None else template.final_turn_pattern
    final_line = _substitute(pattern, binding)
    return "\n".join([t.text for t in template.staged_context] + [final_line])


BUILTIN_TEMPLATE_NAMES = ("continuation", "infill", "elaborate", "rewrite", "custom")


class TemplateLibrary:
    """Named task templates, immutable after construction."""

    def __init__(self, templates: dict[str, TaskTemplate]):
        self._templates = dict(templates)

    def get(self, name: str) -> TaskTemplate:
        try:
            return self._templates[name]
        except KeyError:
            raise KeyError(f"no template named '{name}'") from None

    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self._templates))

    @classmethod
    def builtin(cls) -> "TemplateLibrary":
        templates = {}
        for name in BUILTIN_TEMPLATE_NAMES:
            content = (resources.files(__package__) / "templates" / f"{name}.txt").read_text(
                encoding="utf-8"
            )
            templates[name] = parse_template(content, name=name)
        return cls(templates)

    @classmethod
    def from_dir(cls, path: str | Path) -> "TemplateLibrary":
        """Load templates from a directory, falling back to built-ins by name."""
        base = cls.builtin()._templates
        for file in sorted(Path(path).glob("*.txt")):
            base[file.stem] = load_template(file)
        return cls(base)
