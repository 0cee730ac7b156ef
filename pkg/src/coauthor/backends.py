"""Generation backends behind one interface: a remote HTTP endpoint speaking
a minimal JSON wire protocol, and a deterministic mock for tests and offline
use.

Wire protocol (JSON over HTTP POST):

    request:  {"format": "dialog", "turns": [{"role": ..., "text": ...}, ...],
               "top_k": 40, "num_candidates": 3, "max_response_chars": 1024}
         or:  {"format": "flat", "prompt": "...", ...same params}
    response: {"candidates": ["...", ...]}
    error:    {"error": {"code": "...", "message": "..."}}

Sampling parameters are forwarded to the backend; decoding happens there,
never here.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from enum import Enum

import httpx

from .prompts import ConversationContext, Role, Turn
from .tasks import PromptRequest

MOCK_ENDPOINT = "mock"
MOCK_MAX_PROMPT_CHARS = 100_000


class PromptFormat(str, Enum):
    DIALOG = "dialog"
    FLAT = "flat"


@dataclass(frozen=True)
class GenerationParams:
    top_k: int = 40
    num_candidates: int = 3
    max_response_chars: int = 1024
    seed: int | None = None  # honored only by the mock backend
    timeout_ms: int = 30_000

    def __post_init__(self) -> None:
        for name in ("top_k", "num_candidates", "max_response_chars", "timeout_ms"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class BackendDescriptor:
    """Which backend to call and which prompt serialization it consumes."""

    id: str
    format: PromptFormat
    endpoint: str  # URL, or "mock"


@dataclass
class Candidate:
    """One model response; `raw_text` is kept as received from the backend."""

    text: str
    backend_id: str
    raw_text: str
    annotations: dict = field(default_factory=dict)


class BackendError(Exception):
    """Base class for generation failures; errors are values, never partial state."""


class BackendTimeoutError(BackendError):
    """The backend did not answer within timeout_ms (or is unreachable)."""


class BackendProtocolError(BackendError):
    """Non-2xx status or a response body that does not match the protocol."""


class PromptTooLongError(BackendError):
    """The prompt exceeds the backend's context limit; message is verbatim."""


def serialize_wire(
    req: PromptRequest,
    format: PromptFormat,
    params: GenerationParams | None = None,
) -> dict:
    """Build the JSON payload for the given prompt format."""
    payload: dict = {"format": format.value}
    if format is PromptFormat.DIALOG:
        payload["turns"] = [{"role": t.role.value, "text": t.text} for t in req.context.turns]
    else:
        payload["prompt"] = req.flat_prompt
    if params is not None:
        payload["top_k"] = params.top_k
        payload["num_candidates"] = params.num_candidates
        payload["max_response_chars"] = params.max_response_chars
    return payload


def deserialize_wire(payload: dict) -> ConversationContext | str:
    """Recover the exact prompt content from a wire payload."""
    if payload["format"] == PromptFormat.DIALOG.value:
        return ConversationContext(
            tuple(Turn(Role(t["role"]), t["text"]) for t in payload["turns"])
        )
    return payload["prompt"]


def _prompt_key(req: PromptRequest, format: PromptFormat) -> str:
    if format is PromptFormat.FLAT:
        return req.flat_prompt
    return json.dumps(
        [[t.role.value, t.text] for t in req.context.turns], ensure_ascii=False
    )


_MOCK_FRAMES = (
    "The {word} seemed to listen, and the night grew very still.",
    "Somewhere beyond the {word}, a door creaked open.",
    "A cold wind moved past the {word} and was gone.",
    "Nobody thought about the {word} until it was far too late.",
    "For a long moment the {word} held its breath.",
    "The {word} shimmered faintly, as if lit from within.",
    "Past the {word} lay a field of silver grass.",
    "It was the {word} that finally broke the silence.",
    "High above the {word}, the first star blinked awake.",
    "The {word} remembered things no one had ever written down.",
    "Rain began to fall softly on the {word}.",
    "In the end, only the {word} knew the whole story of that night.",
)

_WORD_RE = re.compile(r"[A-Za-z][A-Za-z']{2,}")

_ECHO_STOPWORDS = frozenset(
    "the and was are with for his her that this from into give next sentence "
    "words story here please rewrite more blank fill describe".split()
)


def _echo_word(prompt: str, pick: int) -> str:
    words = [w.lower() for w in _WORD_RE.findall(prompt)]
    content = [w for w in words if w not in _ECHO_STOPWORDS] or words
    if not content:
        return "page"
    tail = content[-8:]
    return tail[pick % len(tail)]


def _mock_candidates(prompt: str, params: GenerationParams) -> list[str]:
    """Deterministic pseudo-generations: (prompt bytes, seed, index) decide
    everything, and the text echoes a word from the prompt."""
    if len(prompt) > MOCK_MAX_PROMPT_CHARS:
        raise PromptTooLongError(
            f"prompt of {len(prompt)} characters exceeds the mock context "
            f"limit of {MOCK_MAX_PROMPT_CHARS}"
        )
    out: list[str] = []
    for index in range(params.num_candidates):
        digest = hashlib.sha256(
            f"{params.seed}:{index}:".encode("utf-8") + prompt.encode("utf-8")
        ).digest()
        frame = _MOCK_FRAMES[(digest[0] + index) % len(_MOCK_FRAMES)]
        text = frame.format(word=_echo_word(prompt, digest[1]))
        while text in out:
            text = text[:-1] + ", once more."
        out.append(text[: params.max_response_chars])
    return out


def _remote_candidates(endpoint: str, payload: dict, params: GenerationParams) -> list[str]:
    try:
        response = httpx.post(endpoint, json=payload, timeout=params.timeout_ms / 1000.0)
    except (httpx.TimeoutException, httpx.ConnectError) as exc:
        raise BackendTimeoutError(f"backend unreachable or timed out: {exc}") from exc
    except httpx.HTTPError as exc:
        raise BackendProtocolError(f"transport failure: {exc}") from exc

    if response.status_code < 200 or response.status_code >= 300:
        code, message = _parse_error_body(response)
        if code == "prompt_too_long":
            raise PromptTooLongError(message)
        raise BackendProtocolError(f"backend returned {response.status_code}: {message}")

    try:
        body = response.json()
        candidates = body["candidates"]
    except (ValueError, KeyError, TypeError) as exc:
        raise BackendProtocolError(f"malformed backend response: {exc}") from exc
    if not isinstance(candidates, list) or not all(isinstance(c, str) for c in candidates):
        raise BackendProtocolError("backend response 'candidates' must be a list of strings")
    return candidates


def _parse_error_body(response: httpx.Response) -> tuple[str, str]:
    try:
        error = response.json().get("error", {})
        return error.get("code", ""), error.get("message", response.text)
    except ValueError:
        return "", response.text


def generate(
    req: PromptRequest,
    params: GenerationParams,
    backend: BackendDescriptor,
) -> list[Candidate]:
    """Run one generation request; returns 1..num_candidates raw candidates
    in the order the backend produced them."""
    if backend.endpoint == MOCK_ENDPOINT:
        texts = _mock_candidates(_prompt_key(req, backend.format), params)
    else:
        payload = serialize_wire(req, backend.format, params)
        texts = _remote_candidates(backend.endpoint, payload, params)
    if not texts:
        raise BackendProtocolError("backend returned no candidates")
    texts = texts[: params.num_candidates]
    return [Candidate(text=t, backend_id=backend.id, raw_text=t) for t in texts]
