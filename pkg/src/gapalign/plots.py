"""Figure rendering for the report paths (headless matplotlib)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import EvalReport  # noqa: E402


def save_elbow_plot(curve: list[tuple[int, float]], chosen_k: int, path) -> None:
    """WCSS-vs-k curve with the chosen elbow marked."""
    ks = [k for k, _ in curve]
    wcss = [w for _, w in curve]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, wcss, "o-", color="tab:blue")
    chosen_w = dict(curve)[chosen_k]
    ax.plot([chosen_k], [chosen_w], "s", color="tab:red", markersize=10, label=f"k = {chosen_k}")
    ax.set_xlabel("number of clusters k")
    ax.set_ylabel("within-cluster sum of squares")
    ax.set_title("Predicate clustering elbow")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_metrics_plot(report: EvalReport, path) -> None:
    """Per-question F1 bars with the macro average as a reference line."""
    questions = [q.question_id for q in report.per_question]
    f1s = [q.f1 for q in report.per_question]
    fig, ax = plt.subplots(figsize=(max(6, 0.6 * len(questions) + 2), 4))
    ax.bar(range(len(questions)), f1s, color="tab:blue")
    ax.axhline(report.macro_f1, color="tab:red", linestyle="--",
               label=f"macro F1 = {report.macro_f1:.3f}")
    ax.set_xticks(range(len(questions)))
    ax.set_xticklabels(questions, rotation=45, ha="right")
    ax.set_ylabel("F1")
    ax.set_ylim(0, 1.05)
    ax.set_title("Per-question gap detection F1")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
