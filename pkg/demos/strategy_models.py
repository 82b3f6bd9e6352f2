"""Fit bigram strategy models over act sequences and compare corpora.

Two synthetic communities answer differently: one leads with background
before asserting, the other asserts immediately and then cites sources.
The cross-perplexity matrix shows each community's model predicts its own
answers better than the other's.

Run: python3 demos/strategy_models.py
"""

from discotrace import Smoothing, cross_perplexity_matrix, fit_bigram, perplexity

BG = "action_AQ_provide_background"
ASSERT = "action_AQ_assert_answer"
REASON = "action_AQ_provide_reasoning"
CITE = "action_AQ_cite_external_source"

scholarly = [
    [BG, ASSERT, REASON, CITE],
    [BG, BG, ASSERT, CITE],  # repeated acts collapse before counting
    [BG, ASSERT, REASON],
    [BG, REASON, ASSERT, CITE],
]
casual = [
    [ASSERT, REASON],
    [ASSERT],
    [ASSERT, CITE],
    [ASSERT, REASON, REASON],
]

smoothing = Smoothing(mode="add_lambda", lam=1.0)

model = fit_bigram(scholarly, smoothing)
print("scholarly model on its own corpus: "
      f"perplexity {perplexity(model, scholarly):.3f}")
print("scholarly model on the casual corpus: "
      f"perplexity {perplexity(model, casual):.3f}")

matrix = cross_perplexity_matrix({"scholarly": scholarly, "casual": casual},
                                 smoothing)
print("\ncross-perplexity (rows = training corpus, columns = evaluated corpus)")
header = "".join(f"{c:>12}" for c in matrix.col_labels)
print(f"{'':12}{header}")
for label, row in zip(matrix.row_labels, matrix.values):
    cells = "".join(f"{v:12.3f}" for v in row)
    print(f"{label:12}{cells}")
print("\ndiagonal < off-diagonal: each community models itself best")
