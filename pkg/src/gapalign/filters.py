"""Pruning filters that turn flooded similarity scores into a final alignment.

Three variants: threshold (many-to-many), exact (greedy one-to-one over the
threshold set), and best (optimal one-to-one assignment on the converged
scores).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .flooding import AlignmentState

THRESHOLD = "threshold"
EXACT = "exact"
BEST = "best"
FILTER_KINDS = (THRESHOLD, EXACT, BEST)


@dataclass(frozen=True)
class FilteredAlignment:
    kind: str
    pairs: tuple[tuple[int, int, float], ...]  # (model node, student node, score)
    tau: float

    def model_nodes(self) -> set[int]:
        return {m for m, _, _ in self.pairs}

    def score_of(self, m: int) -> float | None:
        """Best score among this model node's pairs, None when unaligned."""
        scores = [sc for mm, _, sc in self.pairs if mm == m]
        return max(scores) if scores else None

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "tau": self.tau,
            "pairs": [{"m": m, "s": s, "score": sc} for m, s, sc in self.pairs],
        }


def _check_tau(tau: float) -> None:
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")


def threshold_filter(state: AlignmentState, tau: float) -> FilteredAlignment:
    """Keep pairs whose converged or initial score strictly exceeds tau."""
    _check_tau(tau)
    kept = [
        (m, s, sf)
        for m, s, s0, sc, sf in state.pairs()
        if sc > tau or s0 > tau
    ]
    return FilteredAlignment(THRESHOLD, tuple(kept), tau)


def exact_filter(state: AlignmentState, tau: float) -> FilteredAlignment:
    """Greedy one-to-one selection from the threshold set, highest sigma_f first;
    ties break lexicographically on (model id, student id)."""
    _check_tau(tau)
    candidates = sorted(
        threshold_filter(state, tau).pairs,
        key=lambda p: (-p[2], p[0], p[1]),
    )
    used_m: set[int] = set()
    used_s: set[int] = set()
    kept = []
    for m, s, sf in candidates:
        if m in used_m or s in used_s:
            continue
        used_m.add(m)
        used_s.add(s)
        kept.append((m, s, sf))
    return FilteredAlignment(EXACT, tuple(kept), tau)


def best_filter(state: AlignmentState, tau: float = 0.5) -> FilteredAlignment:
    """Maximum-weight one-to-one matching over the converged scores.

    Rectangular instances are handled directly (equivalent to zero padding);
    zero-weight assignments are dropped from the output.  `tau` is carried
    along for the gap-detection cases, not used for pruning here.
    """
    _check_tau(tau)
    weights = state.sigma_c
    if weights.size == 0:
        return FilteredAlignment(BEST, (), tau)
    rows, cols = linear_sum_assignment(weights, maximize=True)
    kept = []
    for i, j in zip(rows, cols):
        score = float(weights[i, j])
        if score > 0.0:
            kept.append((state.m_nodes[i], state.s_nodes[j], score))
    return FilteredAlignment(BEST, tuple(kept), tau)


def apply_filter(state: AlignmentState, kind: str, tau: float) -> FilteredAlignment:
    if kind == THRESHOLD:
        return threshold_filter(state, tau)
    if kind == EXACT:
        return exact_filter(state, tau)
    if kind == BEST:
        return best_filter(state, tau)
    raise ValueError(f"unknown filter kind {kind!r}; expected one of {FILTER_KINDS}")


def max_matching_weight(weights: np.ndarray) -> float:
    """Total weight of the optimal assignment; exposed for oracle comparisons."""
    if weights.size == 0:
        return 0.0
    rows, cols = linear_sum_assignment(weights, maximize=True)
    return float(weights[rows, cols].sum())
