"""Recursive splitting of a discourse tree into coarse action segments.

A configured set of (relation, nuclearity) boundary pairs marks nodes
whose children likely realize different discourse acts. Splits are made
at boundary nodes and preserved from deeper in the tree; everything else
collapses to a single span. Background additionally requires both sides
to carry at least ``min_span_k`` EDUs before splitting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .rst import Edu, RstNode, RstTree, get_leaves

#: Default boundary (relation, nuclearity) pairs.
DEFAULT_BOUNDARY_PAIRS = frozenset({
    ("Contrast", "NN"),
    ("Comparison", "NN"),
    ("Topic-Change", "NN"), ("Topic-Change", "NS"), ("Topic-Change", "SN"),
    ("Evaluation", "NS"), ("Evaluation", "SN"), ("Evaluation", "NN"),
    ("Summary", "NN"), ("Summary", "NS"), ("Summary", "SN"),
    ("Background", "NS"), ("Background", "SN"),
})


@dataclass(frozen=True)
class BoundaryConfig:
    boundary_pairs: frozenset = DEFAULT_BOUNDARY_PAIRS
    min_span_k: int = 3

    def __post_init__(self):
        if self.min_span_k < 1:
            raise ValueError("min_span_k must be >= 1")

    @classmethod
    def from_dict(cls, doc: dict) -> "BoundaryConfig":
        pairs = doc.get("boundary_pairs")
        if pairs is None:
            boundary_pairs = DEFAULT_BOUNDARY_PAIRS
        else:
            boundary_pairs = frozenset((rel, nuc) for rel, nuc in pairs)
        return cls(boundary_pairs=boundary_pairs,
                   min_span_k=int(doc.get("min_span_k", 3)))


@dataclass(frozen=True)
class ActionSegment:
    """A contiguous EDU span suspected to carry one discourse act."""

    edu_indices: tuple
    text: str
    answer_id: Optional[str] = None

    def __post_init__(self):
        idx = self.edu_indices
        if any(b - a != 1 for a, b in zip(idx, idx[1:])):
            raise ValueError("edu_indices must be contiguous and increasing")


def is_boundary(relation: str, nuclearity: str, config: BoundaryConfig) -> bool:
    """True iff the (relation, nuclearity) pair marks a segment boundary."""
    return (relation, nuclearity) in config.boundary_pairs


def get_spans(node: RstNode, config: BoundaryConfig) -> list[list[Edu]]:
    """Split a subtree into EDU spans.

    At a boundary node the children's span lists concatenate, except that
    Background requires both sides to hold >= min_span_k EDUs, else the
    subtree collapses. At a non-boundary node, deeper splits are kept when
    the combined span count exceeds two; otherwise the subtree collapses
    to a single span (discarding any internal splits).
    """
    if node.is_leaf:
        return [[node.edu]]
    left = get_spans(node.left, config)
    right = get_spans(node.right, config)
    if is_boundary(node.relation, node.nuclearity, config):
        k = config.min_span_k
        if node.relation != "Background" or (
            _edu_count(left) >= k and _edu_count(right) >= k
        ):
            return left + right
        return [get_leaves(node)]
    if len(left) + len(right) > 2:
        return left + right
    return [get_leaves(node)]


def _edu_count(spans: list[list[Edu]]) -> int:
    return sum(len(span) for span in spans)


def segment_answer(
    tree: RstTree,
    config: Optional[BoundaryConfig] = None,
    answer_id: Optional[str] = None,
) -> list[ActionSegment]:
    """Materialize the tree's spans as segments partitioning 0..n-1."""
    config = config or BoundaryConfig()
    segments = []
    for span in get_spans(tree.root, config):
        segments.append(ActionSegment(
            edu_indices=tuple(edu.index for edu in span),
            text=" ".join(edu.text for edu in span),
            answer_id=answer_id,
        ))
    return segments
