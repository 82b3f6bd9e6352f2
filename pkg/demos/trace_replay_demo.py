"""Tag an answer with discourse acts using the mock gateway.

The mock backend replays responses from a JSONL fixture keyed by a digest
of each request, so this script is fully offline and deterministic. Here
we seed the fixture ourselves; in real use you record it once against a
live backend and replay it forever.

Run: python3 demos/trace_replay_demo.py
"""

import json
import tempfile
from pathlib import Path

from discotrace import (
    BackendSpec,
    BoundaryConfig,
    load_ontology,
    parse_rst_tree,
    segment_answer,
    tag_answer,
)
from discotrace.errors import FixtureMiss
from discotrace.gateway import append_fixture
from discotrace.pipeline import pair_interpretations
from discotrace.interpretations import Interpretation, InterpretationSpace

doc = {
    "relation": "Contrast", "nuclearity": "NN",
    "left": {"edu": "The sky is blue because of Rayleigh scattering."},
    "right": {"edu": "At sunset the longer light path shifts it to red."},
}
question = "Why is the sky blue?"

tree = parse_rst_tree(doc)
answer = " ".join(edu.text for edu in tree.leaves())
segments = segment_answer(tree, BoundaryConfig(), answer_id="a1")
ontology = load_ontology()

space = InterpretationSpace(
    question_id="q1",
    members=[Interpretation(id="id_1", text="Why blue in daytime?"),
             Interpretation(id="id_2", text="Why red at sunset?")],
)

with tempfile.TemporaryDirectory() as tmp:
    fixture = Path(tmp) / "fixture.jsonl"
    fixture.touch()
    backend = BackendSpec(kind="mock", name="demo", model="demo-model",
                          fixture_path=str(fixture))

    # Seed the fixture by replaying until every request has a response.
    canned = iter([
        json.dumps([{"action_id": "action_AQ_assert_answer"}]),
        json.dumps([{"action_id": "action_AQ_provide_background"}]),
        '[{"interpretation_id": "id_1"}]',
        '[{"interpretation_id": "id_2"}]',
    ])
    while True:
        try:
            tagged, diagnostics = tag_answer(question, answer, segments, tree,
                                             ontology, backend)
            trace = pair_interpretations(question, space, tagged, answer,
                                         ontology, backend, answer_id="a1",
                                         question_id="q1", tree=tree,
                                         diagnostics=diagnostics)
            break
        except FixtureMiss as miss:
            append_fixture(str(fixture), miss.digest, next(canned))

    print("trace for a1:")
    for step in trace.steps:
        print(f"  EDUs {list(step.edu_indices)}: {step.act_id}"
              + (f" -> {step.interpretation_id}" if step.interpretation_id else ""))
    if trace.diagnostics:
        print("diagnostics:", trace.diagnostics)
