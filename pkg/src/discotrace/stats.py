"""Bigram strategy models, perplexity, agreement, and content metrics.

Act sequences are wrapped in START/END tokens, and adjacent duplicate act
tokens are collapsed before counting or scoring: a trace never carries
two adjacent segments with the same act after refinement, so the model
normalizes every input to that invariant.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.stats import chi2_contingency

from .errors import (
    EmptyCorpus,
    LengthMismatch,
    QuestionMismatch,
    UnknownSpaceReference,
    ZeroProbabilityTransition,
)
from .interpretations import InterpretationSpace
from .ontology import NONE_ACT_ID, Ontology, is_eligible
from .pipeline import DiscoTrace

START = "<START>"
END = "<END>"


@dataclass(frozen=True)
class Smoothing:
    mode: str = "add_lambda"  # "mle" | "add_lambda"
    lam: float = 1.0

    def __post_init__(self):
        if self.mode not in ("mle", "add_lambda"):
            raise ValueError(f"unknown smoothing mode {self.mode!r}")
        if self.mode == "add_lambda" and self.lam <= 0:
            raise ValueError("lambda must be positive")


def _as_sequences(traces) -> list[list[str]]:
    sequences = []
    for trace in traces:
        if isinstance(trace, DiscoTrace):
            sequences.append(trace.act_sequence())
        else:
            sequences.append(list(trace))
    return sequences


def collapse_adjacent(tokens: Sequence[str]) -> list[str]:
    """Drop each token equal to its immediate predecessor."""
    out = []
    for token in tokens:
        if not out or out[-1] != token:
            out.append(token)
    return out


def iter_transitions(sequences: list[list[str]]):
    """Yield (prev, next) pairs of START-wrapped, collapsed sequences."""
    for seq in sequences:
        tokens = [START] + collapse_adjacent(seq) + [END]
        yield from zip(tokens, tokens[1:])


@dataclass
class BigramModel:
    vocabulary: tuple  # act tokens (incl. NONE); START/END are implicit
    counts: dict  # (prev, next) -> count
    row_totals: dict  # prev -> count
    smoothing: Smoothing
    training_sequences: int

    def probability(self, prev: str, nxt: str) -> float:
        """Transition probability p(next | prev).

        Legal contexts are vocabulary tokens and START; legal next-tokens
        are vocabulary tokens and END.
        """
        if nxt == START or prev == END:
            raise ValueError("START is never a next-token and END never a context")
        if nxt != END and nxt not in self._vocab_set:
            if self.smoothing.mode == "mle":
                raise ZeroProbabilityTransition(prev, nxt)
            raise ValueError(f"token {nxt!r} outside model vocabulary")
        count = self.counts.get((prev, nxt), 0)
        total = self.row_totals.get(prev, 0)
        if self.smoothing.mode == "mle":
            if total == 0 or count == 0:
                raise ZeroProbabilityTransition(prev, nxt)
            return count / total
        lam = self.smoothing.lam
        n_next = len(self.vocabulary) + 1  # legal next-tokens: vocab + END
        return (count + lam) / (total + lam * n_next)

    @property
    def _vocab_set(self):
        return frozenset(self.vocabulary)


def fit_bigram(
    traces,
    smoothing: Smoothing = Smoothing(),
    vocabulary: Optional[Sequence[str]] = None,
) -> BigramModel:
    """Tally transition counts over START-wrapped act sequences.

    ``vocabulary`` should be the full ontology token set so cross-corpus
    evaluation shares support; when omitted it defaults to the observed
    tokens.
    """
    sequences = _as_sequences(traces)
    if not sequences:
        raise EmptyCorpus("need at least one trace")
    counts: Counter = Counter()
    row_totals: Counter = Counter()
    observed = set()
    for prev, nxt in iter_transitions(sequences):
        counts[(prev, nxt)] += 1
        row_totals[prev] += 1
        observed.update(t for t in (prev, nxt) if t not in (START, END))
    if vocabulary is None:
        vocab = tuple(sorted(observed))
    else:
        vocab = tuple(vocabulary)
        missing = observed - set(vocab)
        if missing:
            raise ValueError(f"training tokens outside vocabulary: {sorted(missing)}")
    return BigramModel(
        vocabulary=vocab,
        counts=dict(counts),
        row_totals=dict(row_totals),
        smoothing=smoothing,
        training_sequences=len(sequences),
    )


def perplexity(model: BigramModel, eval_traces) -> float:
    """exp of the mean negative natural-log probability per transition,
    pooled over all transitions (including the END transition) across the
    evaluation corpus."""
    sequences = _as_sequences(eval_traces)
    if not sequences:
        raise EmptyCorpus("evaluation corpus is empty")
    total_nll = 0.0
    n = 0
    for prev, nxt in iter_transitions(sequences):
        total_nll -= math.log(model.probability(prev, nxt))
        n += 1
    return math.exp(total_nll / n)


@dataclass
class PerplexityMatrix:
    row_labels: list[str]  # training corpora
    col_labels: list[str]  # evaluation corpora
    values: np.ndarray

    def to_json(self) -> str:
        return json.dumps({
            "row_labels": self.row_labels,
            "col_labels": self.col_labels,
            "values": self.values.tolist(),
        }, indent=2)

    def write_csv(self, handle) -> None:
        writer = csv.writer(handle)
        writer.writerow(["train"] + self.col_labels)
        for label, row in zip(self.row_labels, self.values):
            writer.writerow([label] + [f"{v:.6f}" for v in row])

    def write_long_csv(self, handle) -> None:
        """Heatmap-ready long format: train,eval,perplexity."""
        writer = csv.writer(handle)
        writer.writerow(["train", "eval", "perplexity"])
        for i, train in enumerate(self.row_labels):
            for j, eval_name in enumerate(self.col_labels):
                writer.writerow([train, eval_name, f"{self.values[i, j]:.6f}"])


def cross_perplexity_matrix(
    corpora: dict[str, list],
    smoothing: Smoothing = Smoothing(),
    vocabulary: Optional[Sequence[str]] = None,
) -> PerplexityMatrix:
    """Fit one model per corpus and evaluate it on every corpus."""
    if not corpora:
        raise EmptyCorpus("need at least one corpus")
    names = list(corpora)
    if vocabulary is None:
        observed = set()
        for traces in corpora.values():
            for seq in _as_sequences(traces):
                observed.update(seq)
        vocabulary = sorted(observed)
    models = {name: fit_bigram(corpora[name], smoothing, vocabulary) for name in names}
    values = np.empty((len(names), len(names)))
    for i, train in enumerate(names):
        for j, eval_name in enumerate(names):
            values[i, j] = perplexity(models[train], corpora[eval_name])
    return PerplexityMatrix(row_labels=names, col_labels=list(names), values=values)


def project_families(traces, ontology: Ontology) -> list[list[str]]:
    """Map act sequences to family-level token sequences (NONE kept)."""
    sequences = []
    for seq in _as_sequences(traces):
        sequences.append([
            tok if tok == NONE_ACT_ID else (ontology.get(tok).family or NONE_ACT_ID)
            for tok in seq
        ])
    return sequences


# --- Interpretation content metrics ---

@dataclass
class InterpretationMetrics:
    coverage: dict  # answer_id -> fraction of S_I addressed (|S_I| >= 2 only)
    unmatched_rate: float  # corpus-level
    matched_per_answer: dict  # answer_id -> count
    eligible_per_answer: dict  # answer_id -> count
    dedication: dict  # (answer_id, interpretation_id) -> fraction


def interpretation_metrics(
    traces: list[DiscoTrace],
    spaces: dict[str, InterpretationSpace],
    ontology: Ontology,
    families: Optional[set] = None,
) -> InterpretationMetrics:
    """Addressing metrics over traces. By default every
    interpretation-eligible act counts; pass ``families`` (e.g. {"AQ"}) to
    restrict the computation to acts from those families."""

    def counts(act_id):
        if not is_eligible(ontology, act_id):
            return False
        return families is None or ontology.get(act_id).family in families

    coverage = {}
    matched_per_answer = {}
    eligible_per_answer = {}
    dedication = {}
    total_eligible = 0
    total_unmatched = 0

    for trace in traces:
        if trace.question_id not in spaces:
            raise UnknownSpaceReference(
                f"trace {trace.answer_id!r} references unknown question {trace.question_id!r}"
            )
        space = spaces[trace.question_id]
        eligible_steps = [step for step in trace.steps if counts(step.act_id)]
        matched = [s for s in eligible_steps if s.interpretation_id is not None]
        matched_per_answer[trace.answer_id] = len(matched)
        eligible_per_answer[trace.answer_id] = len(eligible_steps)
        total_eligible += len(eligible_steps)
        total_unmatched += len(eligible_steps) - len(matched)

        if len(space) >= 2:
            addressed = {s.interpretation_id for s in matched}
            coverage[trace.answer_id] = len(addressed) / len(space)

        if eligible_steps:
            per_interp = Counter(s.interpretation_id for s in matched)
            for iid, count in per_interp.items():
                dedication[(trace.answer_id, iid)] = count / len(eligible_steps)

    unmatched_rate = total_unmatched / total_eligible if total_eligible else 0.0
    return InterpretationMetrics(
        coverage=coverage,
        unmatched_rate=unmatched_rate,
        matched_per_answer=matched_per_answer,
        eligible_per_answer=eligible_per_answer,
        dedication=dedication,
    )


@dataclass
class OveranswerBin:
    lo: float
    hi: float
    n_interpretations: int
    human_mean: float
    model_mean: float


def _addressed_sets(traces: list[DiscoTrace]) -> dict[str, list[set]]:
    by_question = defaultdict(list)
    for trace in traces:
        by_question[trace.question_id].append({
            step.interpretation_id
            for step in trace.steps
            if step.interpretation_id is not None
        })
    return by_question


def overanswering_bins(
    human_traces: list[DiscoTrace],
    model_traces: list[DiscoTrace],
    spaces: dict[str, InterpretationSpace],
    n_bins: int = 10,
) -> list[OveranswerBin]:
    """Bin interpretations by human addressing frequency; report the mean
    model addressing probability per bin."""
    human = _addressed_sets(human_traces)
    model = _addressed_sets(model_traces)
    if set(human) != set(model):
        raise QuestionMismatch("human and model corpora answer different question sets")

    points = []  # (human_freq, model_freq) per interpretation
    for question_id, human_answers in human.items():
        if question_id not in spaces:
            raise UnknownSpaceReference(f"unknown question {question_id!r}")
        model_answers = model[question_id]
        for member in spaces[question_id].members:
            h = sum(member.id in s for s in human_answers) / len(human_answers)
            m = sum(member.id in s for s in model_answers) / len(model_answers)
            points.append((h, m))

    edges = np.linspace(0.0, 1.0, n_bins + 1)
    bins = []
    for b in range(n_bins):
        lo, hi = float(edges[b]), float(edges[b + 1])
        members = [
            (h, m) for h, m in points
            if (lo <= h < hi) or (b == n_bins - 1 and h == hi)
        ]
        bins.append(OveranswerBin(
            lo=lo,
            hi=hi,
            n_interpretations=len(members),
            human_mean=float(np.mean([h for h, _ in members])) if members else float("nan"),
            model_mean=float(np.mean([m for _, m in members])) if members else float("nan"),
        ))
    return bins


# --- Agreement ---

@dataclass
class AgreementReport:
    kappa: float
    n_items: int
    label_space: str = "act"
    degenerate: bool = False


def cohens_kappa(labels_a: Sequence, labels_b: Sequence, label_space: str = "act") -> AgreementReport:
    """Chance-corrected agreement between two equal-length labelings.

    The first argument is treated as the reference labeling: chance
    agreement is the probability that two draws from its marginal label
    distribution coincide. kappa = (p_o - p_e) / (1 - p_e). When the
    reference labeling is constant the correction is undefined; kappa is
    reported as 1 for perfect agreement and 0 otherwise, with the
    degenerate flag set.
    """
    if len(labels_a) != len(labels_b):
        raise LengthMismatch(f"{len(labels_a)} vs {len(labels_b)} items")
    n = len(labels_a)
    if n == 0:
        raise LengthMismatch("need at least one item")
    p_observed = sum(a == b for a, b in zip(labels_a, labels_b)) / n
    marginal = Counter(labels_a)
    p_expected = sum((count / n) ** 2 for count in marginal.values())
    if math.isclose(p_expected, 1.0):
        kappa = 1.0 if math.isclose(p_observed, 1.0) else 0.0
        return AgreementReport(kappa=kappa, n_items=n, label_space=label_space, degenerate=True)
    kappa = (p_observed - p_expected) / (1.0 - p_expected)
    return AgreementReport(kappa=kappa, n_items=n, label_space=label_space)


# --- Act proportion comparison ---

@dataclass
class ActComparison:
    act_id: str
    prop_a: float
    prop_b: float
    chi2: float
    p_value: float
    significant_after_bonferroni: bool


def chi_squared_2x2(table) -> tuple[float, float]:
    """Pearson chi-squared test of independence, no continuity correction.

    Returns (statistic, p). When a row or column margin is zero the test
    is undefined; returns (0.0, 1.0).
    """
    obs = np.asarray(table, dtype=float)
    if obs.sum() == 0 or (obs.sum(axis=0) == 0).any() or (obs.sum(axis=1) == 0).any():
        return 0.0, 1.0
    stat, p, _, _ = chi2_contingency(obs, correction=False)
    return float(stat), float(p)


def act_proportion_test(
    traces_a: list[DiscoTrace],
    traces_b: list[DiscoTrace],
    ontology: Ontology,
    alpha: float = 0.05,
) -> list[ActComparison]:
    """Per act: proportion of answers containing it in each corpus, a 2x2
    chi-squared test, and Bonferroni-corrected significance."""
    if not traces_a or not traces_b:
        raise EmptyCorpus("both corpora must be non-empty")
    acts = ontology.act_ids(include_none=False)
    n_a, n_b = len(traces_a), len(traces_b)
    results = []
    for act_id in acts:
        with_a = sum(act_id in t.act_sequence() for t in traces_a)
        with_b = sum(act_id in t.act_sequence() for t in traces_b)
        stat, p = chi_squared_2x2([[with_a, n_a - with_a], [with_b, n_b - with_b]])
        results.append(ActComparison(
            act_id=act_id,
            prop_a=with_a / n_a,
            prop_b=with_b / n_b,
            chi2=stat,
            p_value=p,
            significant_after_bonferroni=p < alpha / len(acts),
        ))
    return results
