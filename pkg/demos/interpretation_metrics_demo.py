"""Coverage, dedication, and unmatched-rate metrics over discourse traces.

An ambiguous question has a four-member interpretation space. One answer
dedicates half its eligible segments to the first interpretation, a
quarter to the second, and leaves a quarter unmatched.

Run: python3 demos/interpretation_metrics_demo.py
"""

from discotrace import interpretation_metrics, load_ontology
from discotrace.interpretations import Interpretation, InterpretationSpace
from discotrace.pipeline import DiscoTrace, TraceStep

space = InterpretationSpace(
    question_id="q1",
    members=[
        Interpretation(id="id_1", text="Why is the sky blue in daytime?"),
        Interpretation(id="id_2", text="Why is it blue rather than violet?"),
        Interpretation(id="id_3", text="Why is it not blue at sunset?"),
        Interpretation(id="id_4", text="Why does the ocean look blue too?"),
    ],
)

trace = DiscoTrace(
    answer_id="a1", question_id="q1",
    steps=[
        TraceStep(act_id="action_AQ_assert_answer", edu_indices=(0,),
                  interpretation_id="id_1"),
        TraceStep(act_id="action_AQ_provide_reasoning", edu_indices=(1, 2),
                  interpretation_id="id_1"),
        TraceStep(act_id="action_AQ_provide_example", edu_indices=(3,),
                  interpretation_id="id_2"),
        TraceStep(act_id="action_AQ_provide_background", edu_indices=(4,)),
    ],
)

metrics = interpretation_metrics([trace], {"q1": space}, load_ontology())
print(f"coverage:        {metrics.coverage}")
print(f"unmatched rate:  {metrics.unmatched_rate}")
print("dedication:")
for (answer_id, interp_id), value in sorted(metrics.dedication.items()):
    print(f"  {answer_id} -> {interp_id}: {value}")
