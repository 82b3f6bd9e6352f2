"""Act tagging and interpretation pairing for one answer.

Segments are processed strictly left to right: each tagging call carries
the preceding segment and its predicted label. Per-subsegment responses
split an action segment at EDU granularity; contiguous equal labels are
merged so no two adjacent tagged segments share an act. Per-segment
failures degrade to NONE with a diagnostic rather than aborting the
answer (a mock fixture miss is a configuration error and still raises).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import gateway
from .errors import (
    FixtureMiss,
    TransportError,
    UnknownInterpretationId,
    UnparsableResponse,
    InvalidActId,
    IndexOutOfRange,
    MixedForm,
)
from .gateway import BackendSpec
from .interpretations import InterpretationSpace
from .ontology import NONE_ACT_ID, Ontology, is_eligible
from .prompts import (
    build_act_prompt,
    build_interp_label_prompt,
    parse_act_response,
    parse_interp_label,
)
from .rst import RstTree
from .segmentation import ActionSegment

_PARSE_ERRORS = (UnparsableResponse, InvalidActId, IndexOutOfRange, MixedForm)


@dataclass
class TaggedSegment:
    edu_indices: tuple
    act_id: str
    continuation: bool = False

    @property
    def text_key(self):
        return self.edu_indices


@dataclass
class TraceStep:
    act_id: str
    edu_indices: tuple
    interpretation_id: Optional[str] = None


@dataclass
class DiscoTrace:
    """Ordered (act, interpretation) tuples for one answer."""

    answer_id: str
    question_id: str = ""
    steps: list[TraceStep] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def act_sequence(self) -> list[str]:
        return [step.act_id for step in self.steps]

    def to_dict(self) -> dict:
        steps = []
        for step in self.steps:
            record = {"act_id": step.act_id, "edu_indices": list(step.edu_indices)}
            if step.interpretation_id is not None:
                record["interpretation_id"] = step.interpretation_id
            steps.append(record)
        return {
            "answer_id": self.answer_id,
            "question_id": self.question_id,
            "steps": steps,
            "diagnostics": list(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DiscoTrace":
        return cls(
            answer_id=doc["answer_id"],
            question_id=doc.get("question_id", ""),
            steps=[
                TraceStep(
                    act_id=s["act_id"],
                    edu_indices=tuple(s.get("edu_indices", [])),
                    interpretation_id=s.get("interpretation_id"),
                )
                for s in doc.get("steps", [])
            ],
            diagnostics=list(doc.get("diagnostics", [])),
        )


def _segment_text(edu_texts: list[str], indices) -> str:
    return " ".join(edu_texts[i] for i in indices)


def tag_answer(
    question: str,
    answer_text: str,
    segments: list[ActionSegment],
    tree: RstTree,
    ontology: Ontology,
    backend: BackendSpec,
) -> tuple[list[TaggedSegment], list[str]]:
    """Label each segment with a discourse act; returns (tagged, diagnostics)."""
    edu_texts = [edu.text for edu in tree.leaves()]
    tagged: list[TaggedSegment] = []
    diagnostics: list[str] = []
    prev_text: Optional[str] = None
    prev_label: Optional[str] = None

    for segment in segments:
        subsegments = [edu_texts[i] for i in segment.edu_indices]
        request = build_act_prompt(
            question=question,
            answer=answer_text,
            prev_segment=prev_text,
            prev_label=prev_label,
            segment=segment.text,
            subsegments=subsegments,
            ontology=ontology,
            model_name=backend.model,
        )
        assignments = None
        for attempt in range(backend.retry_limit + 1):
            try:
                raw = gateway.complete(backend, request)
                assignments = parse_act_response(raw, ontology, len(subsegments))
                break
            except FixtureMiss:
                raise
            except _PARSE_ERRORS as exc:
                failure = f"parse failure on segment {segment.edu_indices}: {exc}"
            except TransportError as exc:
                failure = f"transport failure on segment {segment.edu_indices}: {exc}"
        if assignments is None:
            diagnostics.append(
                f"{failure} after {backend.retry_limit + 1} attempts; assigned NONE "
                f"(request digest {gateway.request_digest(request)})"
            )
            assignments = []

        pieces = _assignments_to_pieces(segment, assignments)
        for indices, act_id in pieces:
            if tagged and tagged[-1].act_id == act_id:
                tagged[-1] = TaggedSegment(
                    edu_indices=tagged[-1].edu_indices + indices,
                    act_id=act_id,
                    continuation=True,
                )
            else:
                tagged.append(TaggedSegment(edu_indices=indices, act_id=act_id))

        prev_text = segment.text
        prev_label = pieces[-1][1]

    return tagged, diagnostics


def _assignments_to_pieces(segment: ActionSegment, assignments) -> list[tuple[tuple, str]]:
    """Resolve a response into (edu_indices, act_id) pieces in order."""
    if not assignments:
        return [(tuple(segment.edu_indices), NONE_ACT_ID)]
    if assignments[0].subsegment_index is None:
        return [(tuple(segment.edu_indices), assignments[0].action_id)]
    # Per-subsegment form: EDUs not named by any entry inherit the nearest
    # preceding label (or the first entry's label at the left edge).
    by_index = {a.subsegment_index: a.action_id for a in assignments}
    pieces: list[tuple[list, str]] = []
    current = by_index.get(0, assignments[0].action_id)
    for offset, edu_index in enumerate(segment.edu_indices):
        label = by_index.get(offset, current)
        current = label
        if pieces and pieces[-1][1] == label:
            pieces[-1][0].append(edu_index)
        else:
            pieces.append(([edu_index], label))
    return [(tuple(indices), label) for indices, label in pieces]


def pair_interpretations(
    question: str,
    space: Optional[InterpretationSpace],
    tagged: list[TaggedSegment],
    answer_text: str,
    ontology: Ontology,
    backend: BackendSpec,
    answer_id: str = "",
    question_id: str = "",
    tree: Optional[RstTree] = None,
    diagnostics: Optional[list[str]] = None,
) -> DiscoTrace:
    """Attach interpretation ids to eligible tagged segments.

    Ineligible acts and empty spaces skip the labeler call entirely.
    Unknown ids and exhausted transport retries degrade to no
    interpretation, with a diagnostic.
    """
    trace = DiscoTrace(
        answer_id=answer_id,
        question_id=question_id,
        diagnostics=list(diagnostics or []),
    )
    edu_texts = [edu.text for edu in tree.leaves()] if tree is not None else None
    id_to_text = space.id_to_text() if space is not None else {}
    known_ids = set(id_to_text)

    for segment in tagged:
        interpretation_id = None
        if known_ids and is_eligible(ontology, segment.act_id):
            if edu_texts is not None:
                segment_text = _segment_text(edu_texts, segment.edu_indices)
            else:
                segment_text = answer_text
            request = build_interp_label_prompt(
                question=question,
                interpretations=id_to_text,
                answer=answer_text,
                segment=segment_text,
                act_label=ontology.get(segment.act_id).display_name,
                model_name=backend.model,
            )
            for attempt in range(backend.retry_limit + 1):
                try:
                    raw = gateway.complete(backend, request)
                    interpretation_id = parse_interp_label(raw, known_ids)
                    break
                except FixtureMiss:
                    raise
                except UnknownInterpretationId as exc:
                    trace.diagnostics.append(
                        f"segment {segment.edu_indices}: {exc}; treated as NONE"
                    )
                    break
                except (UnparsableResponse, TransportError) as exc:
                    failure = f"segment {segment.edu_indices}: {exc}"
            else:
                trace.diagnostics.append(
                    f"{failure} after {backend.retry_limit + 1} attempts; treated as NONE"
                )
        trace.steps.append(TraceStep(
            act_id=segment.act_id,
            edu_indices=segment.edu_indices,
            interpretation_id=interpretation_id,
        ))
    return trace
