"""Chat-completion backends: live HTTP, fixture replay and scripted stubs.

Every call made through :meth:`Backend.complete` can be appended to a
:class:`Transcript`, which serialises to JSON and doubles as a replay fixture.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import httpx

TRANSCRIPT_VERSION = 1
ROLES = ("system", "user", "assistant")


class LLMError(Exception):
    """Base class for backend failures."""


class ReplayMiss(LLMError):
    pass


class TransportFailure(LLMError):
    pass


class CredentialMissing(LLMError):
    pass


class TranscriptError(ValueError):
    pass


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if self.role in ("system", "user") and not self.content:
            raise ValueError(f"{self.role} message must have content")

    def to_dict(self) -> dict:
        return {"role": self.role, "content": self.content}


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[ChatMessage, ...]
    model_id: str = "gpt-4"
    temperature: float = 0.0
    max_tokens: int = 2048

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        if not self.messages:
            raise ValueError("a request needs at least one message")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must lie in [0, 2]")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")

    def prompt_hash(self) -> str:
        """Stable digest of the message contents (used by strict replay)."""
        payload = json.dumps([m.to_dict() for m in self.messages], sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "messages": [m.to_dict() for m in self.messages],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CompletionRequest":
        return cls(
            messages=tuple(ChatMessage(m["role"], m["content"]) for m in d["messages"]),
            model_id=d.get("model_id", "gpt-4"),
            temperature=float(d.get("temperature", 0.0)),
            max_tokens=int(d.get("max_tokens", 2048)),
        )


@dataclass(frozen=True)
class TranscriptEntry:
    stage: str
    request: CompletionRequest | None
    response: str
    timestamp: float
    prompt_hash: str | None = None
    tokens: int = 0

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "request": self.request.to_dict() if self.request is not None else None,
            "response": self.response,
            "timestamp": self.timestamp,
            "prompt_hash": self.prompt_hash,
            "tokens": self.tokens,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TranscriptEntry":
        req = d.get("request")
        return cls(
            stage=str(d["stage"]),
            request=CompletionRequest.from_dict(req) if req else None,
            response=str(d["response"]),
            timestamp=float(d.get("timestamp", 0.0)),
            prompt_hash=d.get("prompt_hash"),
            tokens=int(d.get("tokens", 0)),
        )


@dataclass
class Transcript:
    """Append-only log of stage calls for one trial."""

    entries: list[TranscriptEntry] = field(default_factory=list)

    def append(self, entry: TranscriptEntry) -> None:
        if self.entries and entry.timestamp < self.entries[-1].timestamp:
            raise ValueError("transcript entries must be ordered by time")
        self.entries.append(entry)

    def stages(self) -> list[str]:
        return [e.stage for e in self.entries]

    @property
    def tokens(self) -> int:
        return sum(e.tokens for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def to_dict(self) -> dict:
        return {"version": TRANSCRIPT_VERSION, "entries": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, d) -> "Transcript":
        if not isinstance(d, dict) or "entries" not in d:
            raise TranscriptError("malformed transcript: expected an object with 'entries'")
        if d.get("version") != TRANSCRIPT_VERSION:
            raise TranscriptError(f"unsupported transcript version {d.get('version')!r}")
        try:
            return cls([TranscriptEntry.from_dict(e) for e in d["entries"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise TranscriptError(f"malformed transcript entry: {exc}") from None


def save_transcript(transcript: Transcript, path: str | Path) -> None:
    Path(path).write_text(json.dumps(transcript.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def load_transcript(path: str | Path) -> Transcript:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TranscriptError(f"malformed transcript file {path}: {exc}") from None
    return Transcript.from_dict(data)


class Backend:
    """Common front end; subclasses implement :meth:`_complete`."""

    def __init__(self, clock: Callable[[], float] = time.time):
        self.clock = clock

    def complete(self, request: CompletionRequest, stage: str = "", transcript: Transcript | None = None) -> str:
        text, tokens = self._complete(request, stage)
        if transcript is not None:
            stamp = self.clock()
            if transcript.entries:
                stamp = max(stamp, transcript.entries[-1].timestamp)
            transcript.append(TranscriptEntry(stage, request, text, stamp, request.prompt_hash(), tokens))
        return text

    def _complete(self, request: CompletionRequest, stage: str) -> tuple[str, int]:
        raise NotImplementedError


class ReplayBackend(Backend):
    """Serves recorded responses matched by (stage, per-stage call ordinal).

    With ``strict=True`` the recorded prompt hash must also equal the hash of
    the incoming request.
    """

    def __init__(self, entries, strict: bool = False, clock: Callable[[], float] = time.time):
        super().__init__(clock)
        if isinstance(entries, Transcript):
            entries = entries.entries
        self.by_stage: dict[str, list[TranscriptEntry]] = {}
        for e in entries:
            self.by_stage.setdefault(e.stage, []).append(e)
        self.strict = strict
        self.counters: dict[str, int] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path, strict: bool = False) -> "ReplayBackend":
        return cls(load_transcript(path), strict=strict)

    def _complete(self, request, stage):
        with self._lock:
            k = self.counters.get(stage, 0)
            recorded = self.by_stage.get(stage, [])
            if k >= len(recorded):
                raise ReplayMiss(f"no recorded response #{k + 1} for stage {stage!r}")
            self.counters[stage] = k + 1
        entry = recorded[k]
        if self.strict and entry.prompt_hash != request.prompt_hash():
            raise ReplayMiss(f"prompt hash mismatch for stage {stage!r} call #{k + 1}")
        return entry.response, entry.tokens


class StubBackend(Backend):
    """Scripted responses per stage.

    A string is returned on every call; a list is consumed in order; a
    callable receives ``(request, stage)``.
    """

    def __init__(self, responses: dict, clock: Callable[[], float] = time.time):
        super().__init__(clock)
        self.responses = responses
        self.counters: dict[str, int] = {}
        self._lock = threading.Lock()

    def _complete(self, request, stage):
        spec = self.responses.get(stage, self.responses.get("*"))
        if spec is None:
            raise ReplayMiss(f"stub has no response for stage {stage!r}")
        if callable(spec):
            return spec(request, stage), 0
        if isinstance(spec, str):
            return spec, 0
        with self._lock:
            k = self.counters.get(stage, 0)
            if k >= len(spec):
                raise ReplayMiss(f"stub exhausted for stage {stage!r}")
            self.counters[stage] = k + 1
        return spec[k], 0


RETRY_STATUS = frozenset({408, 409, 429, 500, 502, 503, 504})


class LiveBackend(Backend):
    """OpenAI-style ``/chat/completions`` client with bounded retries."""

    def __init__(self, endpoint: str, model_id: str = "gpt-4", credential_env: str = "OPENAI_API_KEY",
                 max_retries: int = 3, backoff: float = 1.0, timeout: float = 120.0,
                 client: httpx.Client | None = None, sleep: Callable[[float], None] = time.sleep,
                 clock: Callable[[], float] = time.time):
        super().__init__(clock)
        key = os.environ.get(credential_env)
        if not key:
            raise CredentialMissing(f"environment variable {credential_env} is not set")
        self.endpoint = endpoint
        self.model_id = model_id
        self._key = key
        self.max_retries = max_retries
        self.backoff = backoff
        self.sleep = sleep
        self.client = client or httpx.Client(timeout=timeout)

    def _complete(self, request, stage):
        body = {
            "model": request.model_id or self.model_id,
            "messages": [m.to_dict() for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {"Authorization": f"Bearer {self._key}", "Content-Type": "application/json"}
        last = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                self.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self.client.post(self.endpoint, json=body, headers=headers)
            except httpx.TransportError as exc:
                last = f"{type(exc).__name__}: {exc}"
                continue
            if resp.status_code in RETRY_STATUS:
                last = f"HTTP {resp.status_code}"
                continue
            if resp.status_code >= 400:
                raise TransportFailure(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                data = resp.json()
                text = data["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportFailure(f"unexpected response body: {exc}") from None
            tokens = int((data.get("usage") or {}).get("total_tokens", 0))
            return text, tokens
        raise TransportFailure(f"giving up after {self.max_retries + 1} attempts ({last})")
