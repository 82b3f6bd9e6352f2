"""Binary discourse tree data model and JSON (de)serialization.

Trees are produced by an external discourse parser and delivered as JSON:
an internal node is ``{"relation": str, "nuclearity": "NN"|"NS"|"SN",
"left": node, "right": node}`` and a leaf is ``{"edu": str}``. Trees are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .errors import (
    MalformedDocument,
    NonBinaryNode,
    UnknownNuclearity,
    UnknownRelation,
)

#: The 18 coarse-grained rhetorical relations emitted by the parser.
RELATIONS = frozenset({
    "Elaboration", "Attribution", "Joint", "Same-Unit", "Explanation",
    "Enablement", "Background", "Evaluation", "Cause", "Contrast",
    "Temporal", "Comparison", "Topic-Change", "Manner-Means",
    "Textual-Organization", "Condition", "Summary", "Topic-Comment",
})

NUCLEARITIES = frozenset({"NN", "NS", "SN"})


@dataclass(frozen=True)
class Edu:
    """Elementary discourse unit: a clause-like atomic text span."""

    index: int
    text: str


@dataclass(frozen=True)
class RstNode:
    """Either a leaf holding one EDU or a binary internal node."""

    edu: Optional[Edu] = None
    relation: Optional[str] = None
    nuclearity: Optional[str] = None
    left: Optional["RstNode"] = None
    right: Optional["RstNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.edu is not None


@dataclass(frozen=True)
class RstTree:
    """A validated binary discourse tree for one answer."""

    root: RstNode
    edu_count: int

    def leaves(self) -> list[Edu]:
        return get_leaves(self.root)


def normalize_relation(label: str) -> str:
    """Case-normalize a relation label to Title-Case, hyphens preserved."""
    return "-".join(part.capitalize() for part in label.split("-"))


def get_leaves(node: RstNode) -> list[Edu]:
    """Return the in-order EDU sequence of a subtree."""
    if node.is_leaf:
        return [node.edu]
    return get_leaves(node.left) + get_leaves(node.right)


def leaf_count(node: RstNode) -> int:
    if node.is_leaf:
        return 1
    return leaf_count(node.left) + leaf_count(node.right)


def parse_rst_tree(serialized: Union[str, dict]) -> RstTree:
    """Deserialize and validate a tree document.

    Accepts either a JSON string or an already-decoded dict. Leaf order
    preserves document order; EDU indices are assigned 0..n-1 left to
    right. EDU text is stored verbatim.
    """
    if isinstance(serialized, str):
        try:
            doc = json.loads(serialized)
        except json.JSONDecodeError as exc:
            raise MalformedDocument(f"invalid JSON: {exc}") from exc
    else:
        doc = serialized
    if not isinstance(doc, dict):
        raise MalformedDocument("tree document must be a JSON object")

    counter = iter(range(10**9))
    root = _parse_node(doc, counter)
    return RstTree(root=root, edu_count=leaf_count(root))


def _parse_node(doc: dict, counter: Iterator[int]) -> RstNode:
    if not isinstance(doc, dict):
        raise MalformedDocument(f"node must be an object, got {type(doc).__name__}")
    if "edu" in doc:
        text = doc["edu"]
        if not isinstance(text, str) or not text.strip():
            raise MalformedDocument("leaf 'edu' must be a non-empty string")
        return RstNode(edu=Edu(index=next(counter), text=text))

    if "relation" not in doc or "nuclearity" not in doc:
        raise MalformedDocument("internal node requires 'relation' and 'nuclearity'")
    if "left" not in doc or "right" not in doc:
        raise NonBinaryNode("internal node requires exactly 'left' and 'right' children")

    relation = normalize_relation(str(doc["relation"]))
    if relation not in RELATIONS:
        raise UnknownRelation(f"unknown relation {doc['relation']!r}")
    nuclearity = str(doc["nuclearity"]).upper()
    if nuclearity not in NUCLEARITIES:
        raise UnknownNuclearity(f"unknown nuclearity {doc['nuclearity']!r}")

    left = _parse_node(doc["left"], counter)
    right = _parse_node(doc["right"], counter)
    return RstNode(relation=relation, nuclearity=nuclearity, left=left, right=right)


def serialize_rst_tree(tree: RstTree) -> dict:
    """Inverse of :func:`parse_rst_tree` (structure round-trips exactly)."""
    return _serialize_node(tree.root)


def _serialize_node(node: RstNode) -> dict:
    if node.is_leaf:
        return {"edu": node.edu.text}
    return {
        "relation": node.relation,
        "nuclearity": node.nuclearity,
        "left": _serialize_node(node.left),
        "right": _serialize_node(node.right),
    }
