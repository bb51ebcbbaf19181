"""Shared fixtures: the worked switch/bulb graph pair and small random graphs."""

import numpy as np

from gapalign.clustering import PredicateClustering
from gapalign.embeddings import EmbeddingStore
from gapalign.graph import AnswerGraph, Triple, build_graph, canonicalize

# Node-id aliases for the worked propagation example.  The model graph has two
# subjects fanning out to two objects over one shared label; the student graph
# has one subject fanning out to two objects.
A5, A7, A6, A8 = 0, 1, 2, 3  # model: the switch, the circuit, the bulb, the battery
B3, B4, B5 = 0, 1, 2  # student: The switch, the circuit, the light


def switch_like_pair() -> tuple[AnswerGraph, AnswerGraph]:
    """Canonical graph pair reproducing the documented propagation structure:
    (A5,B3) has four same-label out-neighbors, (A7,B4) has two in-neighbors."""
    clustering = PredicateClustering(k=1, assignment={"closes": 0})
    gm = build_graph(
        [
            Triple("the switch", "closes", "the circuit"),
            Triple("the switch", "closes", "the bulb"),
            Triple("the battery", "closes", "the circuit"),
            Triple("the battery", "closes", "the bulb"),
        ]
    )
    gs = build_graph(
        [
            Triple("The switch", "closes", "the circuit"),
            Triple("The switch", "closes", "the light"),
        ]
    )
    return canonicalize(gm, clustering), canonicalize(gs, clustering)


def random_graph(rng: np.random.RandomState, n_nodes: int, n_edges: int,
                 labels: list[int]) -> AnswerGraph:
    """Random canonical answer graph over phrase nodes w0..w{n-1}."""
    triples = []
    names = [f"w{i}" for i in range(n_nodes)]
    predicates = {lbl: f"p{lbl}" for lbl in labels}
    for _ in range(n_edges):
        src = names[rng.randint(n_nodes)]
        dst = names[rng.randint(n_nodes)]
        lbl = labels[rng.randint(len(labels))]
        triples.append(Triple(src, predicates[lbl], dst))
    graph = build_graph(triples)
    clustering = PredicateClustering(
        k=len(labels), assignment={p: lbl for lbl, p in predicates.items()}
    )
    return canonicalize(graph, clustering)


def random_sigma0(rng: np.random.RandomState, pcg) -> dict:
    return {pair: float(rng.uniform(0, 1)) for pair in pcg.pairs()}


def tiny_store(words: dict[str, list[float]]) -> EmbeddingStore:
    dim = len(next(iter(words.values())))
    return EmbeddingStore(dim, {w: np.array(v, dtype=float) for w, v in words.items()})
