"""Scoring of predicted gaps against annotated true gaps.

Per-answer TP/FP/FN counts come from greedy ROUGE-2 F1 matching with threshold
delta; precision/recall/F1 roll up per question and macro-average across
questions.  A paired two-tailed t-test compares per-question F1 series between
two runs.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field

from .embeddings import tokenize
from .errors import EmptyInputError, ValidationError

GREEDY = "greedy"
HUNGARIAN = "hungarian"


def _bigrams(tokens: list[str]) -> Counter:
    return Counter(zip(tokens, tokens[1:]))


def rouge2_f1(candidate: str, reference: str) -> float:
    """Bigram-multiset F1; falls back to unigram overlap when either side is a
    single token, and to 0 when either side is empty."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 0.0
    if len(cand) < 2 or len(ref) < 2:
        c_counts, r_counts = Counter(cand), Counter(ref)
    else:
        c_counts, r_counts = _bigrams(cand), _bigrams(ref)
    matches = sum((c_counts & r_counts).values())
    if matches == 0:
        return 0.0
    precision = matches / sum(c_counts.values())
    recall = matches / sum(r_counts.values())
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class GapMatchCounts:
    tp: int
    fp: int
    fn: int


def match_gaps(
    sys: list[str], truth: list[str], delta: float, method: str = GREEDY
) -> GapMatchCounts:
    """Match system gaps to true gaps one-shot: a true gap consumed by one
    system gap is unavailable to the others.  A match counts as TP only when
    its ROUGE-2 F1 strictly exceeds delta."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    if method == GREEDY:
        return _match_greedy(sys, truth, delta)
    if method == HUNGARIAN:
        return _match_hungarian(sys, truth, delta)
    raise ValueError(f"unknown matching method {method!r}")


def _match_greedy(sys: list[str], truth: list[str], delta: float) -> GapMatchCounts:
    available = list(range(len(truth)))
    tp = 0
    for predicted in sys:
        if not available:
            break
        scores = [(rouge2_f1(predicted, truth[i]), i) for i in available]
        best_score, best_i = max(scores, key=lambda t: (t[0], -t[1]))
        if best_score > delta:
            tp += 1
            available.remove(best_i)
    return GapMatchCounts(tp=tp, fp=len(sys) - tp, fn=len(truth) - tp)


def _match_hungarian(sys: list[str], truth: list[str], delta: float) -> GapMatchCounts:
    if not sys or not truth:
        return GapMatchCounts(tp=0, fp=len(sys), fn=len(truth))
    import numpy as np
    from scipy.optimize import linear_sum_assignment

    scores = np.array([[rouge2_f1(p, t) for t in truth] for p in sys])
    rows, cols = linear_sum_assignment(scores, maximize=True)
    tp = int(sum(1 for i, j in zip(rows, cols) if scores[i, j] > delta))
    return GapMatchCounts(tp=tp, fp=len(sys) - tp, fn=len(truth) - tp)


def per_answer_metrics(counts: GapMatchCounts) -> tuple[float, float, float]:
    """P, R, F1 with vacuous 0/0 ratios defined as 1 (empty claims are correct)."""
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 1.0
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 1.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return precision, recall, f1


@dataclass(frozen=True)
class AnswerMetrics:
    answer_id: str
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class QuestionMetrics:
    question_id: str
    n_answers: int
    precision: float
    recall: float
    f1: float


@dataclass
class EvalReport:
    per_answer: list[AnswerMetrics]
    per_question: list[QuestionMetrics]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    groups: dict[str, dict] | None = None
    record_failures: int = 0
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        payload = {
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
            "per_question": [
                {
                    "question_id": q.question_id,
                    "n_answers": q.n_answers,
                    "precision": q.precision,
                    "recall": q.recall,
                    "f1": q.f1,
                }
                for q in self.per_question
            ],
            "per_answer": [
                {
                    "answer_id": a.answer_id,
                    "precision": a.precision,
                    "recall": a.recall,
                    "f1": a.f1,
                }
                for a in self.per_answer
            ],
            "groups": self.groups,
            "record_failures": self.record_failures,
        }
        payload.update(self.extras)
        return payload

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def aggregate(
    per_answer: list[AnswerMetrics],
    question_map: dict[str, str],
    group_map: dict[str, str] | None = None,
) -> EvalReport:
    """Unweighted mean within each question, then unweighted mean across
    questions, independently for P, R, and F1."""
    by_question: dict[str, list[AnswerMetrics]] = {}
    for metrics in per_answer:
        if metrics.answer_id not in question_map:
            raise ValidationError(f"answer {metrics.answer_id!r} maps to no question")
        by_question.setdefault(question_map[metrics.answer_id], []).append(metrics)

    per_question = [
        QuestionMetrics(
            question_id=qid,
            n_answers=len(answers),
            precision=_mean([a.precision for a in answers]),
            recall=_mean([a.recall for a in answers]),
            f1=_mean([a.f1 for a in answers]),
        )
        for qid, answers in sorted(by_question.items())
    ]
    if per_question:
        macro_p = _mean([q.precision for q in per_question])
        macro_r = _mean([q.recall for q in per_question])
        macro_f1 = _mean([q.f1 for q in per_question])
    else:
        macro_p = macro_r = macro_f1 = 0.0

    groups = None
    if group_map is not None:
        groups = {}
        labels = sorted({g for g in group_map.values() if g})
        for label in labels:
            subset = [a for a in per_answer if group_map.get(a.answer_id) == label]
            if not subset:
                continue
            sub_report = aggregate(subset, question_map)
            groups[label] = {
                "n_answers": len(subset),
                "precision": sub_report.macro_precision,
                "recall": sub_report.macro_recall,
                "f1": sub_report.macro_f1,
            }

    return EvalReport(
        per_answer=list(per_answer),
        per_question=per_question,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f1,
        groups=groups,
    )


def write_report_csv(report: EvalReport, path) -> None:
    """One row per question plus a final macro row."""
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["question_id", "n_answers", "precision", "recall", "f1"])
        for q in report.per_question:
            writer.writerow(
                [q.question_id, q.n_answers, f"{q.precision:.6f}", f"{q.recall:.6f}", f"{q.f1:.6f}"]
            )
        writer.writerow(
            [
                "MACRO",
                sum(q.n_answers for q in report.per_question),
                f"{report.macro_precision:.6f}",
                f"{report.macro_recall:.6f}",
                f"{report.macro_f1:.6f}",
            ]
        )


# --- paired t-test -----------------------------------------------------------

def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    MAXIT, EPS, FPMIN = 200, 3e-14, 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) via the continued fraction with the symmetry transformation."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_tailed(t: float, df: int) -> float:
    """Two-tailed survival probability of Student's t."""
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def paired_t_test(a: list[float], b: list[float]) -> tuple[float, float]:
    """Paired two-tailed t-test on per-question scores.

    Returns (t, p).  All-zero differences report (0, 1); zero variance with a
    nonzero mean reports a signed infinite t with p = 0.
    """
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise ValueError("need at least two paired observations")
    diffs = [x - y for x, y in zip(a, b)]
    n = len(diffs)
    mean = sum(diffs) / n
    if all(d == 0 for d in diffs):
        return 0.0, 1.0
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    if var == 0.0:
        return math.copysign(math.inf, mean), 0.0
    t = mean / math.sqrt(var / n)
    return t, t_sf_two_tailed(t, n - 1)


# --- dataset statistics ------------------------------------------------------

@dataclass(frozen=True)
class CorpusStats:
    n: int
    length_mean: float
    length_std: float  # population standard deviation
    length_max: int
    gap_density: float

    def rounded_lengths(self) -> tuple[int, int, int]:
        return round(self.length_mean), round(self.length_std), self.length_max


def dataset_stats(records) -> CorpusStats:
    """Student-answer token-length statistics plus average gaps per answer."""
    if not records:
        raise EmptyInputError("empty corpus")
    lengths = [len(r.student_answer.split()) for r in records]
    n = len(lengths)
    mean = sum(lengths) / n
    var = sum((x - mean) ** 2 for x in lengths) / n
    total_gaps = sum(len(r.true_gaps) for r in records)
    return CorpusStats(
        n=n,
        length_mean=mean,
        length_std=math.sqrt(var),
        length_max=max(lengths),
        gap_density=total_gaps / n,
    )
