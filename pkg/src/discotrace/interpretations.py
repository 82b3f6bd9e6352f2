"""Building the deduplicated interpretation space of a question.

Raw interpretations are pooled across one or more generator backends
(config order, then generation order) and greedily clustered: a candidate
joins the first existing member whose embedding cosine similarity meets
the threshold, merging source sets, else it opens a new member. Ids are
assigned in member-creation order ("id_1", "id_2", ...).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import gateway
from .errors import DiscoTraceError, EmbeddingDimensionMismatch
from .gateway import BackendSpec
from .prompts import build_interp_gen_prompt, parse_interp_list

DEFAULT_DEDUP_THRESHOLD = 0.85


@dataclass
class Interpretation:
    id: str
    text: str
    sources: set = field(default_factory=set)


@dataclass
class InterpretationSpace:
    question_id: str
    members: list[Interpretation] = field(default_factory=list)
    dedup_threshold: float = DEFAULT_DEDUP_THRESHOLD

    def __len__(self):
        return len(self.members)

    def id_to_text(self) -> dict[str, str]:
        return {m.id: m.text for m in self.members}

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "threshold": self.dedup_threshold,
            "members": [
                {"id": m.id, "text": m.text, "sources": sorted(m.sources)}
                for m in self.members
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "InterpretationSpace":
        return cls(
            question_id=doc["question_id"],
            dedup_threshold=doc.get("threshold", DEFAULT_DEDUP_THRESHOLD),
            members=[
                Interpretation(id=m["id"], text=m["text"], sources=set(m.get("sources", [])))
                for m in doc.get("members", [])
            ],
        )


def generate_raw(
    question: str,
    community_context: str,
    backends: list[BackendSpec],
) -> tuple[list[tuple[str, str]], list[str]]:
    """Pool raw interpretations across generator backends.

    Returns (pooled items, warnings). A backend failure with at least one
    success degrades to a partial pool; warnings carry the failures. All
    backends failing raises the last error.
    """
    if not backends:
        raise ValueError("at least one generator backend required")
    pooled: list[tuple[str, str]] = []
    warnings: list[str] = []
    last_error: Optional[Exception] = None
    successes = 0
    for backend in backends:
        request = build_interp_gen_prompt(question, community_context, backend.model)
        try:
            raw = gateway.complete(backend, request)
            texts = parse_interp_list(raw)
        except DiscoTraceError as exc:
            warnings.append(f"generator {backend.name}: {exc}")
            last_error = exc
            continue
        successes += 1
        pooled.extend((backend.name, text) for text in texts)
    if successes == 0 and last_error is not None:
        raise last_error
    return pooled, warnings


EmbedFn = Callable[[list[str]], list[list[float]]]


def deduplicate(
    raw: list[tuple[str, str]],
    embedder: Union[BackendSpec, EmbedFn],
    threshold: float = DEFAULT_DEDUP_THRESHOLD,
    question_id: str = "",
) -> InterpretationSpace:
    """Greedy first-representative clustering of pooled interpretations."""
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1]")
    space = InterpretationSpace(question_id=question_id, dedup_threshold=threshold)
    if not raw:
        return space

    texts = [text for _, text in raw]
    if isinstance(embedder, BackendSpec):
        vectors = gateway.embed(embedder, texts)
    else:
        vectors = embedder(texts)
    matrix = np.asarray(vectors, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != len(texts):
        raise EmbeddingDimensionMismatch("embedder returned a ragged or misshaped array")
    norms = np.linalg.norm(matrix, axis=1)
    norms[norms == 0] = 1.0
    unit = matrix / norms[:, None]

    representatives: list[np.ndarray] = []
    for (source, text), vector in zip(raw, unit):
        member = None
        for existing, rep in zip(space.members, representatives):
            if float(vector @ rep) >= threshold:
                member = existing
                break
        if member is None:
            member = Interpretation(id=f"id_{len(space.members) + 1}", text=text)
            space.members.append(member)
            representatives.append(vector)
        member.sources.add(source)
    return space


def build_space(
    question_id: str,
    question: str,
    community_context: str,
    generator_backends: list[BackendSpec],
    embedder: Union[BackendSpec, EmbedFn],
    threshold: float = DEFAULT_DEDUP_THRESHOLD,
) -> tuple[InterpretationSpace, list[str]]:
    """Generate, pool, and deduplicate the space for one question."""
    raw, warnings = generate_raw(question, community_context, generator_backends)
    space = deduplicate(raw, embedder, threshold, question_id=question_id)
    return space, warnings
