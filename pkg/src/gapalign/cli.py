"""Command-line driver: `gapalign cluster | run | compare`.

Flags mirror the pipeline configuration and may also come from a JSON config
file (explicit flags win).  Logs go to stderr; data only to output files.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import clustering as clust
from . import corpus as corpus_io
from . import evaluation, pipeline, plots
from .embeddings import load_vectors_path
from .errors import GapAlignError

log = logging.getLogger("gapalign")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gapalign",
        description="Identify gaps in student answers via directed answer-graph alignment.",
    )
    parser.add_argument("--config", help="JSON file with defaults for any flag")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--embeddings", help="word2vec text format vectors")
        p.add_argument("--corpus", help="JSON Lines corpus")
        p.add_argument("--output-dir", help="directory for output files (default: out)")
        p.add_argument("--seed", type=int, help="clustering seed (default: 0)")

    p_cluster = sub.add_parser("cluster", help="cluster corpus predicates once per dataset")
    add_common(p_cluster)
    p_cluster.add_argument("--k", type=int, help="force the number of clusters")
    p_cluster.add_argument("--k-max", type=int, help="elbow search bound (default: 30)")

    p_run = sub.add_parser("run", help="detect gaps for every record and evaluate")
    add_common(p_run)
    p_run.add_argument("--clustering", help="reuse a clustering JSON written by `cluster`")
    p_run.add_argument("--k", type=int, help="force k when clustering inline")
    p_run.add_argument("--k-max", type=int, help="elbow search bound (default: 30)")
    p_run.add_argument("--filter", choices=["threshold", "exact", "best"],
                       help="alignment filter (default: threshold)")
    p_run.add_argument("--tau", type=float, help="similarity threshold (default: 0.5)")
    p_run.add_argument("--delta", type=float, help="ROUGE-2 match threshold (default: 0.5)")
    p_run.add_argument("--epsilon", type=float, help="fixpoint residual bound (default: 1e-4)")
    p_run.add_argument("--max-iter", type=int, help="fixpoint iteration cap (default: 1000)")
    p_run.add_argument("--neighbor-mode", choices=["incident", "outgoing"],
                       help="neighbor scope for node-gap cases (default: incident)")
    p_run.add_argument("--group-by", choices=["dir", "none"],
                       help="add a dir/nodir breakdown to the report (default: none)")
    p_run.add_argument("--match", choices=["greedy", "hungarian"],
                       help="gap matching strategy for evaluation (default: greedy)")

    p_cmp = sub.add_parser("compare", help="paired t-test between two run reports")
    p_cmp.add_argument("report_a")
    p_cmp.add_argument("report_b")
    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    """Defaults < config file < explicit flags."""
    merged: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            merged.update(json.load(fh))
    for key, value in vars(args).items():
        if key in ("config", "command") or value is None:
            continue
        merged[key] = value
    return merged


def _pipeline_config(options: dict) -> pipeline.PipelineConfig:
    cfg = pipeline.PipelineConfig(
        embeddings_path=options.get("embeddings"),
        corpus_path=options.get("corpus"),
        filter_kind=options.get("filter", "threshold"),
        tau=options.get("tau", 0.5),
        delta=options.get("delta", 0.5),
        epsilon=options.get("epsilon", 1e-4),
        max_iter=options.get("max_iter", 1000),
        k=options.get("k"),
        k_max=options.get("k_max", 30),
        seed=options.get("seed", 0),
        neighbor_mode=options.get("neighbor_mode", "incident"),
        output_dir=options.get("output_dir", "out"),
        clustering_path=options.get("clustering"),
        group_by=options.get("group_by", "none"),
        match_method=options.get("match", "greedy"),
    )
    cfg.validate()
    return cfg


def _load_inputs(cfg: pipeline.PipelineConfig):
    if not cfg.corpus_path:
        raise GapAlignError("--corpus is required")
    if not cfg.embeddings_path:
        raise GapAlignError("--embeddings is required")
    records = corpus_io.load_corpus(cfg.corpus_path)
    store = load_vectors_path(cfg.embeddings_path)
    return records, store


def _build_clustering(records, store, cfg):
    predicates = corpus_io.corpus_predicates(records)
    if cfg.k is not None:
        k = cfg.k
    else:
        k = clust.select_k(predicates, store, cfg.k_max, cfg.seed)
    curve = clust.wcss_curve(predicates, store, min(cfg.k_max, len(predicates)), cfg.seed)
    return clust.cluster_predicates(predicates, store, k, cfg.seed), curve, k


def cmd_cluster(options: dict) -> int:
    cfg = _pipeline_config(options)
    records, store = _load_inputs(cfg)
    clustering, curve, k = _build_clustering(records, store, cfg)

    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cluster_path = out_dir / "clustering.json"
    cluster_path.write_text(clustering.to_json() + "\n", encoding="utf-8")
    plots.save_elbow_plot(curve, k, out_dir / "elbow.png")

    log.info("chose k=%d over %d predicates", k, len(clustering.assignment))
    log.info("WCSS curve: %s", ", ".join(f"k={kk}: {w:.6f}" for kk, w in curve))
    log.info("wrote %s", cluster_path)
    return 0


def cmd_run(options: dict) -> int:
    cfg = _pipeline_config(options)
    records, store = _load_inputs(cfg)
    if cfg.clustering_path:
        clustering = clust.PredicateClustering.from_json(
            Path(cfg.clustering_path).read_text(encoding="utf-8")
        )
    else:
        clustering, _, _ = _build_clustering(records, store, cfg)

    for warning in corpus_io.validate_corpus(records, clustering):
        log.warning("%s", warning)
    if not records:
        log.warning("empty corpus: nothing to do")

    result = pipeline.run_corpus(records, clustering, store, cfg)
    report = result.report
    report.extras["config"] = {
        "filter": cfg.filter_kind,
        "tau": cfg.tau,
        "delta": cfg.delta,
        "epsilon": cfg.epsilon,
        "max_iter": cfg.max_iter,
        "seed": cfg.seed,
        "neighbor_mode": cfg.neighbor_mode,
        "match": cfg.match_method,
    }

    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    predictions_path = out_dir / "predictions.jsonl"
    with open(predictions_path, "w", encoding="utf-8") as fh:
        for payload in pipeline.predictions_payload(result):
            fh.write(json.dumps(payload, sort_keys=True) + "\n")
    (out_dir / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    evaluation.write_report_csv(report, out_dir / "report.csv")
    plots.save_metrics_plot(report, out_dir / "report.png")

    log.info(
        "processed %d records (%d failed); macro P/R/F1 = %.4f/%.4f/%.4f",
        len(records),
        len(result.failures),
        report.macro_precision,
        report.macro_recall,
        report.macro_f1,
    )
    log.info("wrote %s, report.json, report.csv, report.png", predictions_path)
    return 0


def cmd_compare(options: dict) -> int:
    path_a, path_b = options["report_a"], options["report_b"]
    report_a = json.loads(Path(path_a).read_text(encoding="utf-8"))
    report_b = json.loads(Path(path_b).read_text(encoding="utf-8"))
    f1_a = {q["question_id"]: q["f1"] for q in report_a["per_question"]}
    f1_b = {q["question_id"]: q["f1"] for q in report_b["per_question"]}
    if set(f1_a) != set(f1_b):
        diff = sorted(set(f1_a) ^ set(f1_b))
        raise GapAlignError(f"reports cover different question sets; disagreement: {diff}")

    questions = sorted(f1_a)
    series_a = [f1_a[q] for q in questions]
    series_b = [f1_b[q] for q in questions]
    t, p = evaluation.paired_t_test(series_a, series_b)

    print(f"questions: {len(questions)}")
    for q in questions:
        print(f"  {q}: F1 {f1_a[q]:.4f} vs {f1_b[q]:.4f} (delta {f1_a[q] - f1_b[q]:+.4f})")
    mean_delta = sum(a - b for a, b in zip(series_a, series_b)) / len(questions)
    print(f"mean F1 delta: {mean_delta:+.4f}")
    print(f"paired two-tailed t-test: t = {t:.6g}, p = {p:.6g}")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    options = _merge_config(args)
    try:
        if args.command == "cluster":
            return cmd_cluster(options)
        if args.command == "run":
            return cmd_run(options)
        if args.command == "compare":
            return cmd_compare(options)
    except (GapAlignError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
