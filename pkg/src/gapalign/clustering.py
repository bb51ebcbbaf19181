"""Predicate canonicalization: k-means over phrase vectors with elbow k-selection.

Clustering runs once per dataset over the union of model and student predicates;
the resulting cluster ids become the canonical edge labels shared by every
answer-graph pair.  Everything is deterministic given the seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingStore
from .errors import EmptyInputError

MAX_LLOYD_ITERATIONS = 300
MAX_RESTARTS = 8


@dataclass(frozen=True)
class PredicateClustering:
    k: int
    assignment: dict[str, int]
    centroids: np.ndarray | None = None
    seed: int | None = None

    def to_json(self) -> str:
        payload = {"k": self.k, "seed": self.seed, "assignment": self.assignment}
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PredicateClustering":
        payload = json.loads(text)
        assignment = {str(p): int(c) for p, c in payload["assignment"].items()}
        return cls(k=int(payload["k"]), assignment=assignment, seed=payload.get("seed"))


def _phrase_matrix(predicates: list[str], store: EmbeddingStore) -> np.ndarray:
    return np.array([store.phrase_vector(p).values for p in predicates])


def _seed_centroids(points: np.ndarray, k: int, first: int) -> np.ndarray:
    """Farthest-point seeding from a fixed start, then max-min-distance picks."""
    chosen = [first]
    dist = np.linalg.norm(points - points[first], axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(dist))  # argmax takes the lowest index on ties
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(points - points[nxt], axis=1))
    return points[chosen].copy()


def _assign(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # ties go to the lowest cluster index (argmin semantics)
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def _fix_empty_clusters(points, labels, centroids, k):
    """Reseed each empty cluster with the point farthest from its own centroid.

    Only points from clusters with at least two members are eligible, so a fix
    never re-empties another cluster; such a donor always exists while any
    cluster is empty (k <= n).
    """
    for c in range(k):
        if np.any(labels == c):
            continue
        counts = np.bincount(labels, minlength=k)
        dist = np.linalg.norm(points - centroids[labels], axis=1)
        dist[counts[labels] < 2] = -np.inf
        farthest = int(np.argmax(dist))
        labels[farthest] = c
        centroids[c] = points[farthest]
    return labels, centroids


def _lloyd_from(points: np.ndarray, k: int, first: int) -> tuple[np.ndarray, np.ndarray]:
    centroids = _seed_centroids(points, k, first)
    labels = _assign(points, centroids)
    labels, centroids = _fix_empty_clusters(points, labels, centroids, k)
    for _ in range(MAX_LLOYD_ITERATIONS):
        for c in range(k):
            centroids[c] = points[labels == c].mean(axis=0)
        new_labels = _assign(points, centroids)
        new_labels, centroids = _fix_empty_clusters(points, new_labels, centroids, k)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    for c in range(k):
        centroids[c] = points[labels == c].mean(axis=0)
    return labels, centroids


def lloyd_kmeans(points: np.ndarray, k: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic Lloyd iteration; returns (labels, centroids).

    A single farthest-point start can settle in a poor local optimum, so the
    iteration restarts from a bounded, seed-derived set of start points and the
    lowest-WCSS outcome wins (first such outcome on ties).
    """
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    n = len(points)
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points {n}")
    rng = np.random.RandomState(seed)
    starts = {int(rng.randint(n))}
    idx = 0
    while len(starts) < min(n, MAX_RESTARTS):
        starts.add(idx)
        idx += 1
    best: tuple[float, np.ndarray, np.ndarray] | None = None
    for first in sorted(starts):
        labels, centroids = _lloyd_from(points, k, first)
        value = wcss(points, labels, centroids)
        if best is None or value < best[0] - 1e-12:
            best = (value, labels, centroids)
    return best[1], best[2]


def wcss(points: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> float:
    return float(((points - centroids[labels]) ** 2).sum())


def cluster_predicates(
    predicates: set[str], store: EmbeddingStore, k: int, seed: int
) -> PredicateClustering:
    """Cluster predicate phrase vectors into k groups with ids 0..k-1."""
    ordered = sorted(predicates)
    if not ordered:
        raise EmptyInputError("no predicates to cluster")
    points = _phrase_matrix(ordered, store)
    labels, centroids = lloyd_kmeans(points, k, seed)
    assignment = {p: int(c) for p, c in zip(ordered, labels)}
    return PredicateClustering(k=k, assignment=assignment, centroids=centroids, seed=seed)


def wcss_curve(
    predicates: set[str], store: EmbeddingStore, k_max: int, seed: int
) -> list[tuple[int, float]]:
    ordered = sorted(predicates)
    if not ordered:
        raise EmptyInputError("no predicates to cluster")
    points = _phrase_matrix(ordered, store)
    top = min(k_max, len(ordered))
    curve = []
    for k in range(1, top + 1):
        labels, centroids = lloyd_kmeans(points, k, seed)
        curve.append((k, wcss(points, labels, centroids)))
    return curve


def select_k(predicates: set[str], store: EmbeddingStore, k_max: int, seed: int) -> int:
    """Elbow selection: the k whose (k, WCSS) point lies farthest from the
    chord between the first and last points of the curve; ties -> smallest k.
    """
    curve = wcss_curve(predicates, store, k_max, seed)
    return elbow_k(curve)


def elbow_k(curve: list[tuple[int, float]]) -> int:
    if not curve:
        raise EmptyInputError("empty WCSS curve")
    if len(curve) == 1:
        return curve[0][0]
    (k0, w0), (k1, w1) = curve[0], curve[-1]
    dx, dy = k1 - k0, w1 - w0
    norm = (dx * dx + dy * dy) ** 0.5
    best_k, best_d = curve[0][0], -1.0
    for k, w in curve:
        # perpendicular distance from (k, w) to the chord
        d = abs(dy * (k - k0) - dx * (w - w0)) / norm
        if d > best_d + 1e-12:
            best_k, best_d = k, d
    return best_k
