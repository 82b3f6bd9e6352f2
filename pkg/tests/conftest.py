"""Shared fixtures and builders for the test suite."""

import json
import random

import pytest

from discotrace import load_ontology
from discotrace.errors import FixtureMiss
from discotrace.gateway import append_fixture
from discotrace.rst import RELATIONS, NUCLEARITIES


def leaf(text):
    return {"edu": text}


def node(relation, nuclearity, left, right):
    return {"relation": relation, "nuclearity": nuclearity, "left": left, "right": right}


def chain_tree(n_edus, relation="Elaboration", nuclearity="NS"):
    """Left-skewed tree over n_edus leaves e0..e{n-1}."""
    tree = leaf("e0")
    for i in range(1, n_edus):
        tree = node(relation, nuclearity, tree, leaf(f"e{i}"))
    return tree


def random_tree(rng, max_edus=20):
    """Random binary tree document with random relation/nuclearity labels."""
    n = rng.randint(1, max_edus)
    relations = sorted(RELATIONS)
    nuclearities = sorted(NUCLEARITIES)

    def build(lo, hi):
        if hi - lo == 1:
            return leaf(f"edu {lo}")
        split = rng.randint(lo + 1, hi - 1)
        return node(
            rng.choice(relations),
            rng.choice(nuclearities),
            build(lo, split),
            build(split, hi),
        )

    return build(0, n)


@pytest.fixture(scope="session")
def ontology():
    return load_ontology()


def record_fixture_by_replay(fixture_path, run, responder, max_rounds=500):
    """Populate a mock fixture file by replaying ``run`` until it stops
    raising FixtureMiss; ``responder(request)`` supplies each missing
    response. Returns run()'s final result."""
    fixture_path = str(fixture_path)
    open(fixture_path, "a").close()
    for _ in range(max_rounds):
        try:
            return run()
        except FixtureMiss as miss:
            if miss.request is None:
                raise
            append_fixture(fixture_path, miss.digest, responder(miss.request))
    raise RuntimeError("fixture replay did not converge")


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
