"""HTTP chat-completion and embedding backends, plus a mock replay backend.

This is the only module that performs network I/O. Live backends speak an
OpenAI-style wire format with a configurable auth header and response
content path, and retry transient failures with exponential backoff. Mock
backends replay recorded fixtures: JSONL lines of
``{"request_digest": ..., "response_text": ...}`` keyed by a SHA-256
digest of the canonical request, so replays are deterministic and
byte-stable.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import requests

from .errors import AuthError, EmbeddingDimensionMismatch, FixtureMiss, TransportError
from .prompts import ChatRequest

DEFAULT_CONTENT_PATH = ("choices", 0, "message", "content")
DEFAULT_EMBEDDING_PATH = ("data",)


@dataclass(frozen=True)
class BackendSpec:
    """Configuration for one chat-completion or embedding service."""

    kind: str = "mock"  # "live" | "mock"
    name: str = "backend"
    model: str = "mock-model"
    endpoint: str = ""
    auth_header: str = "Authorization"
    auth_template: str = "Bearer {token}"
    auth_env: Optional[str] = None
    fixture_path: Optional[str] = None
    max_in_flight: int = 4
    retry_limit: int = 3
    content_path: tuple = DEFAULT_CONTENT_PATH

    def __post_init__(self):
        if self.kind not in ("live", "mock"):
            raise ValueError(f"kind must be 'live' or 'mock', got {self.kind!r}")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        if self.retry_limit < 0:
            raise ValueError("retry_limit must be >= 0")

    @classmethod
    def from_dict(cls, doc: dict) -> "BackendSpec":
        doc = dict(doc)
        if "content_path" in doc:
            doc["content_path"] = tuple(doc["content_path"])
        return cls(**doc)


def request_digest(request: ChatRequest) -> str:
    """Stable SHA-256 digest of a chat request's canonical JSON form."""
    canonical = json.dumps(
        {
            "system": request.system,
            "user": request.user,
            "model_name": request.model_name,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def text_digest(model: str, text: str) -> str:
    """Digest keying one embedding input in a mock fixture."""
    canonical = json.dumps({"model": model, "input": text}, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


_fixture_cache: dict[str, dict[str, str]] = {}


def load_fixture(path: str) -> dict[str, str]:
    """Load (and cache) a fixture file mapping digest -> response text."""
    resolved = str(Path(path).resolve())
    mtime = os.path.getmtime(resolved)
    cached = _fixture_cache.get(resolved)
    if cached is not None and cached.get("_mtime") == mtime:
        return cached["entries"]
    entries = {}
    with open(resolved, encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            entries[record["request_digest"]] = record["response_text"]
    _fixture_cache[resolved] = {"_mtime": mtime, "entries": entries}
    return entries


def append_fixture(path: str, digest: str, response_text: str) -> None:
    """Record one response in a fixture file (test/recording helper)."""
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(json.dumps(
            {"request_digest": digest, "response_text": response_text},
            ensure_ascii=False,
        ) + "\n")
    _fixture_cache.pop(str(Path(path).resolve()), None)


def _auth_headers(backend: BackendSpec) -> dict[str, str]:
    if not backend.auth_env:
        return {}
    token = os.environ.get(backend.auth_env)
    if token is None:
        raise AuthError(f"environment variable {backend.auth_env!r} is not set")
    return {backend.auth_header: backend.auth_template.format(token=token)}


def _extract(payload, path):
    value = payload
    for key in path:
        value = value[key]
    return value


def _post_with_retries(backend: BackendSpec, body: dict):
    """POST with exponential backoff on transport failures and 5xx."""
    last_error = None
    for attempt in range(backend.retry_limit + 1):
        if attempt:
            time.sleep(min(0.5 * 2 ** (attempt - 1), 8.0))
        try:
            response = requests.post(
                backend.endpoint,
                json=body,
                headers=_auth_headers(backend),
                timeout=60,
            )
        except requests.RequestException as exc:
            last_error = exc
            continue
        if response.status_code in (401, 403):
            raise AuthError(f"backend returned {response.status_code}")
        if response.status_code >= 500:
            last_error = TransportError(f"backend returned {response.status_code}")
            continue
        if response.status_code >= 400:
            raise TransportError(f"backend returned {response.status_code}: {response.text}")
        return response.json()
    raise TransportError(f"exhausted {backend.retry_limit} retries: {last_error}")


def complete(backend: BackendSpec, request: ChatRequest) -> str:
    """Return the assistant text for a chat request."""
    if backend.kind == "mock":
        if not backend.fixture_path:
            raise ValueError("mock backend requires fixture_path")
        entries = load_fixture(backend.fixture_path)
        digest = request_digest(request)
        if digest not in entries:
            raise FixtureMiss(digest, request=request)
        return entries[digest]

    body = {
        "model": request.model_name,
        "temperature": request.temperature,
        "messages": [
            {"role": "system", "content": request.system},
            {"role": "user", "content": request.user},
        ],
    }
    if request.max_tokens is not None:
        body["max_tokens"] = request.max_tokens
    payload = _post_with_retries(backend, body)
    try:
        return _extract(payload, backend.content_path)
    except (KeyError, IndexError, TypeError) as exc:
        raise TransportError(f"response missing content at {backend.content_path}") from exc


def embed(backend: BackendSpec, texts: list[str]) -> list[list[float]]:
    """Return one fixed-dimension vector per input text."""
    if backend.kind == "mock":
        if not backend.fixture_path:
            raise ValueError("mock backend requires fixture_path")
        entries = load_fixture(backend.fixture_path)
        vectors = []
        for text in texts:
            digest = text_digest(backend.model, text)
            if digest not in entries:
                raise FixtureMiss(digest)
            vectors.append(json.loads(entries[digest]))
    else:
        payload = _post_with_retries(backend, {"model": backend.model, "input": texts})
        data = _extract(payload, DEFAULT_EMBEDDING_PATH)
        vectors = [item["embedding"] for item in data]

    dims = {len(v) for v in vectors}
    if len(dims) > 1:
        raise EmbeddingDimensionMismatch(f"mixed embedding dimensions {sorted(dims)}")
    return vectors
