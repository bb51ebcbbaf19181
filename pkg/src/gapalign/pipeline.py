"""End-to-end record processing: graphs, canonicalization, flooding, filtering,
gap detection, and corpus-level evaluation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import evaluation, filters, flooding, gaps, graph
from .clustering import PredicateClustering
from .corpus import AnswerRecord
from .embeddings import EmbeddingStore

log = logging.getLogger("gapalign")


@dataclass
class PipelineConfig:
    embeddings_path: str | None = None
    corpus_path: str | None = None
    filter_kind: str = filters.THRESHOLD
    tau: float = 0.5
    delta: float = 0.5
    epsilon: float = 1e-4
    max_iter: int = 1000
    k: int | None = None
    k_max: int = 30
    seed: int = 0
    neighbor_mode: str = gaps.INCIDENT
    output_dir: str = "out"
    clustering_path: str | None = None
    group_by: str = "none"
    match_method: str = evaluation.GREEDY

    def validate(self) -> None:
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must lie in [0, 1], got {self.delta}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.filter_kind not in filters.FILTER_KINDS:
            raise ValueError(f"filter must be one of {filters.FILTER_KINDS}")
        if self.neighbor_mode not in gaps.NEIGHBOR_MODES:
            raise ValueError(f"neighbor_mode must be one of {gaps.NEIGHBOR_MODES}")


@dataclass
class RecordResult:
    record: AnswerRecord
    gaps: list[gaps.Gap]
    state: flooding.AlignmentState
    alignment: filters.FilteredAlignment
    counts: evaluation.GapMatchCounts
    metrics: evaluation.AnswerMetrics


@dataclass
class RunResult:
    results: list[RecordResult] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)  # (record key, error)
    report: evaluation.EvalReport | None = None


def detect_record_gaps(
    record: AnswerRecord,
    clustering: PredicateClustering,
    store: EmbeddingStore,
    config: PipelineConfig,
) -> tuple[list[gaps.Gap], flooding.AlignmentState, filters.FilteredAlignment]:
    gm = graph.canonicalize(graph.build_graph(list(record.model_triples)), clustering)
    gs = graph.canonicalize(graph.build_graph(list(record.student_triples)), clustering)
    state = flooding.align_graphs(
        gm, gs, store, epsilon=config.epsilon, i_max=config.max_iter
    )
    alignment = filters.apply_filter(state, config.filter_kind, config.tau)
    found = gaps.detect_gaps(gm, alignment, config.tau, config.neighbor_mode)
    return found, state, alignment


def run_corpus(
    records: list[AnswerRecord],
    clustering: PredicateClustering,
    store: EmbeddingStore,
    config: PipelineConfig,
) -> RunResult:
    """Process records in input order; per-record failures are logged, skipped,
    and counted instead of aborting the run."""
    config.validate()
    out = RunResult()
    question_map: dict[str, str] = {}
    group_map: dict[str, str] = {}
    per_answer: list[evaluation.AnswerMetrics] = []

    for record in records:
        rid = f"{record.question_id}/{record.student_answer_id}"
        try:
            found, state, alignment = detect_record_gaps(record, clustering, store, config)
        except Exception as exc:  # noqa: BLE001 - fault isolation per record
            log.error("record %s failed: %s", rid, exc)
            out.failures.append((rid, str(exc)))
            continue
        counts = evaluation.match_gaps(
            [g.text for g in found],
            list(record.true_gaps),
            config.delta,
            method=config.match_method,
        )
        precision, recall, f1 = evaluation.per_answer_metrics(counts)
        metrics = evaluation.AnswerMetrics(rid, precision, recall, f1)
        question_map[rid] = record.question_id
        if record.group:
            group_map[rid] = record.group
        per_answer.append(metrics)
        out.results.append(
            RecordResult(record, found, state, alignment, counts, metrics)
        )

    report = evaluation.aggregate(
        per_answer,
        question_map,
        group_map if config.group_by == "dir" else None,
    )
    report.record_failures = len(out.failures)
    out.report = report
    return out


def predictions_payload(result: RunResult) -> list[dict]:
    return [
        {
            "question_id": r.record.question_id,
            "student_answer_id": r.record.student_answer_id,
            "gaps": [g.as_dict() for g in r.gaps],
        }
        for r in result.results
    ]
