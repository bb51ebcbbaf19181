"""Similarity-flooding alignment of a canonical answer-graph pair.

Stages: the pairwise connectivity graph (PCG) over model x student node pairs,
the induced propagation graph (IPG) with reverse edges and uniform propagation
coefficients, and the max-normalized fixpoint iteration producing the converged
scores.  Also houses the brute-force optimal-alignment oracle used to sanity
check filter output on small instances.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingStore, cosine
from .errors import OracleSizeError
from .graph import AnswerGraph

Pair = tuple[int, int]  # (model node id, student node id)


@dataclass(frozen=True)
class PCG:
    """Node set is all non-dummy model x student pairs; an edge links two pairs
    exactly when both graphs carry a same-labeled edge between the underlying
    nodes."""

    m_nodes: tuple[int, ...]
    s_nodes: tuple[int, ...]
    edges: tuple[tuple[Pair, Pair, int], ...]  # (src pair, dst pair, label)

    def pairs(self) -> list[Pair]:
        return [(m, s) for m in self.m_nodes for s in self.s_nodes]


@dataclass(frozen=True)
class IPGEdge:
    src: Pair
    dst: Pair
    weight: float
    label: int
    direction: str  # "forward" | "reverse"


@dataclass(frozen=True)
class IPG:
    pcg: PCG
    edges: tuple[IPGEdge, ...]


@dataclass
class AlignmentState:
    """Per-pair similarity scores of one model/student alignment job."""

    m_nodes: list[int]
    s_nodes: list[int]
    sigma0: np.ndarray  # shape (len(m_nodes), len(s_nodes))
    sigma_c: np.ndarray
    sigma_f: np.ndarray
    iterations_used: int = 0
    converged_naturally: bool = True
    history: list[np.ndarray] = field(default_factory=list)

    def _index(self, m: int, s: int) -> tuple[int, int]:
        return self.m_nodes.index(m), self.s_nodes.index(s)

    def get0(self, m: int, s: int) -> float:
        i, j = self._index(m, s)
        return float(self.sigma0[i, j])

    def get_c(self, m: int, s: int) -> float:
        i, j = self._index(m, s)
        return float(self.sigma_c[i, j])

    def get_f(self, m: int, s: int) -> float:
        i, j = self._index(m, s)
        return float(self.sigma_f[i, j])

    def pairs(self):
        for i, m in enumerate(self.m_nodes):
            for j, s in enumerate(self.s_nodes):
                yield m, s, float(self.sigma0[i, j]), float(self.sigma_c[i, j]), float(
                    self.sigma_f[i, j]
                )

    def sigma_c_map(self) -> dict[Pair, float]:
        return {(m, s): sc for m, s, _, sc, _ in self.pairs()}

    def to_json(self) -> str:
        payload = {
            "pairs": [
                {"m": m, "s": s, "sigma0": s0, "sigmaC": sc, "sigmaF": sf}
                for m, s, s0, sc, sf in self.pairs()
            ],
            "iterations_used": self.iterations_used,
            "converged_naturally": self.converged_naturally,
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_pairs(
        cls,
        entries: list[tuple[int, int, float, float]],
        iterations_used: int = 0,
        converged_naturally: bool = True,
    ) -> "AlignmentState":
        """Build a state from (m, s, sigma0, sigmaC) rows; unlisted pairs get 0."""
        m_nodes = sorted({m for m, _, _, _ in entries})
        s_nodes = sorted({s for _, s, _, _ in entries})
        sigma0 = np.zeros((len(m_nodes), len(s_nodes)))
        sigma_c = np.zeros((len(m_nodes), len(s_nodes)))
        for m, s, s0, sc in entries:
            i, j = m_nodes.index(m), s_nodes.index(s)
            sigma0[i, j] = s0
            sigma_c[i, j] = sc
        return cls(
            m_nodes=m_nodes,
            s_nodes=s_nodes,
            sigma0=sigma0,
            sigma_c=sigma_c,
            sigma_f=np.maximum(sigma0, sigma_c),
            iterations_used=iterations_used,
            converged_naturally=converged_naturally,
        )

    @classmethod
    def from_json(cls, text: str) -> "AlignmentState":
        payload = json.loads(text)
        entries = [
            (int(p["m"]), int(p["s"]), float(p["sigma0"]), float(p["sigmaC"]))
            for p in payload["pairs"]
        ]
        return cls.from_pairs(
            entries,
            iterations_used=int(payload.get("iterations_used", 0)),
            converged_naturally=bool(payload.get("converged_naturally", True)),
        )


def build_pcg(gm: AnswerGraph, gs: AnswerGraph) -> PCG:
    """Pair product of the non-dummy node sets plus same-label edge pairs."""
    for g in (gm, gs):
        if not g.is_canonical():
            raise ValueError("both graphs must be canonicalized before PCG construction")
    m_dummy = {n.id for n in gm.nodes if n.is_dummy}
    s_dummy = {n.id for n in gs.nodes if n.is_dummy}
    m_nodes = tuple(n.id for n in gm.nodes if not n.is_dummy)
    s_nodes = tuple(n.id for n in gs.nodes if not n.is_dummy)

    edges: list[tuple[Pair, Pair, int]] = []
    seen: set[tuple[Pair, Pair, int]] = set()
    for em in gm.edges:
        if em.src in m_dummy or em.dst in m_dummy:
            continue
        for es in gs.edges:
            if es.src in s_dummy or es.dst in s_dummy:
                continue
            if em.label != es.label:
                continue
            edge = ((em.src, es.src), (em.dst, es.dst), em.label)
            if edge not in seen:
                seen.add(edge)
                edges.append(edge)
    return PCG(m_nodes, s_nodes, tuple(edges))


def build_ipg(pcg: PCG) -> IPG:
    """Add a reverse edge per PCG edge and weight every (node, label, direction)
    group uniformly at 1/|group|."""
    fwd_groups: dict[tuple[Pair, int], list[Pair]] = {}
    rev_groups: dict[tuple[Pair, int], list[Pair]] = {}
    for src, dst, label in pcg.edges:
        fwd_groups.setdefault((src, label), []).append(dst)
        rev_groups.setdefault((dst, label), []).append(src)

    edges: list[IPGEdge] = []
    for (src, label), dsts in fwd_groups.items():
        w = 1.0 / len(dsts)
        for dst in dsts:
            edges.append(IPGEdge(src, dst, w, label, "forward"))
    for (src, label), dsts in rev_groups.items():
        w = 1.0 / len(dsts)
        for dst in dsts:
            edges.append(IPGEdge(src, dst, w, label, "reverse"))
    return IPG(pcg, tuple(edges))


def initial_similarity(
    gm: AnswerGraph, gs: AnswerGraph, store: EmbeddingStore
) -> dict[Pair, float]:
    """Cosine of the phrase mean-vectors for every non-dummy node pair."""
    m_vecs = {n.id: store.phrase_vector(n.phrase) for n in gm.real_nodes()}
    s_vecs = {n.id: store.phrase_vector(n.phrase) for n in gs.real_nodes()}
    return {
        (m, s): cosine(mv, sv) for m, mv in m_vecs.items() for s, sv in s_vecs.items()
    }


def _compile_edges(ipg: IPG, index: dict[Pair, int]):
    src = np.array([index[e.src] for e in ipg.edges], dtype=int)
    dst = np.array([index[e.dst] for e in ipg.edges], dtype=int)
    w = np.array([e.weight for e in ipg.edges], dtype=float)
    return src, dst, w


def _unnormalized_update(sigma: np.ndarray, src, dst, w) -> np.ndarray:
    u = sigma.copy()
    if len(w):
        np.add.at(u, dst, sigma[src] * w)
    return u


def propagation_step(ipg: IPG, sigma: dict[Pair, float]) -> dict[Pair, float]:
    """One unnormalized update: sigma plus the weighted in-neighbor sum."""
    pairs = ipg.pcg.pairs()
    index = {p: i for i, p in enumerate(pairs)}
    vec = np.array([sigma[p] for p in pairs], dtype=float)
    u = _unnormalized_update(vec, *_compile_edges(ipg, index))
    return {p: float(u[i]) for p, i in index.items()}


def flood(
    ipg: IPG,
    sigma0: dict[Pair, float],
    epsilon: float = 1e-4,
    i_max: int = 1000,
    record_history: bool = False,
) -> AlignmentState:
    """Iterate the normalized fixpoint until the residual Euclidean norm drops
    below epsilon, or force convergence after i_max iterations."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if i_max < 1:
        raise ValueError(f"i_max must be >= 1, got {i_max}")

    pairs = ipg.pcg.pairs()
    m_nodes = list(ipg.pcg.m_nodes)
    s_nodes = list(ipg.pcg.s_nodes)
    index = {p: i for i, p in enumerate(pairs)}
    for p in pairs:
        if p not in sigma0:
            raise ValueError(f"sigma0 is missing pair {p}")

    n = len(pairs)
    sigma = np.array([sigma0[p] for p in pairs], dtype=float)
    src_idx, dst_idx, weights = _compile_edges(ipg, index)

    history: list[np.ndarray] = []
    iterations = 0
    converged = True
    start = sigma.copy()
    for iterations in range(1, i_max + 1):
        u = _unnormalized_update(sigma, src_idx, dst_idx, weights)
        peak = u.max() if n else 0.0
        new_sigma = u / peak if peak > 0 else sigma.copy()
        if record_history:
            history.append(new_sigma.copy())
        residual = float(np.linalg.norm(new_sigma - sigma))
        sigma = new_sigma
        if residual < epsilon:
            break
    else:
        converged = False
    if n == 0:
        iterations = 0

    n_m, n_s = len(m_nodes), len(s_nodes)
    sigma0_mat = start.reshape(n_m, n_s) if n else np.zeros((n_m, n_s))
    sigma_c_mat = sigma.reshape(n_m, n_s) if n else np.zeros((n_m, n_s))
    state = AlignmentState(
        m_nodes=m_nodes,
        s_nodes=s_nodes,
        sigma0=sigma0_mat,
        sigma_c=sigma_c_mat,
        sigma_f=np.maximum(sigma0_mat, sigma_c_mat),
        iterations_used=iterations,
        converged_naturally=converged,
    )
    if record_history:
        state.history = history
    return state


def align_graphs(
    gm: AnswerGraph,
    gs: AnswerGraph,
    store: EmbeddingStore,
    epsilon: float = 1e-4,
    i_max: int = 1000,
) -> AlignmentState:
    """Full alignment of a canonical graph pair: PCG, IPG, sigma0, flooding."""
    pcg = build_pcg(gm, gs)
    ipg = build_ipg(pcg)
    sigma0 = initial_similarity(gm, gs, store)
    return flood(ipg, sigma0, epsilon=epsilon, i_max=i_max)


@dataclass(frozen=True)
class EdgePairing:
    """One predicate-induced alignment: a model edge paired with a student edge
    sharing the same canonical label."""

    label: int | str
    subject_pair: Pair
    object_pair: Pair | None  # None when either object is a dummy node

    def score(self, sigma: dict[Pair, float]) -> float:
        total = sigma.get(self.subject_pair, 0.0)
        if self.object_pair is not None:
            total += sigma.get(self.object_pair, 0.0)
        return total


@dataclass(frozen=True)
class OptimalAlignment:
    pairings: tuple[EdgePairing, ...]
    score: float

    def node_pairs(self) -> set[Pair]:
        out = set()
        for p in self.pairings:
            out.add(p.subject_pair)
            if p.object_pair is not None:
                out.add(p.object_pair)
        return out


def predicate_induced_candidates(
    gm: AnswerGraph, gs: AnswerGraph
) -> dict[int | str, list[EdgePairing]]:
    """For each label shared by both graphs, every model-edge/student-edge pairing."""
    m_dummy = {n.id for n in gm.nodes if n.is_dummy}
    s_dummy = {n.id for n in gs.nodes if n.is_dummy}

    def key(e):
        return e.label if e.label is not None else e.predicate

    m_by_label: dict[int | str, list] = {}
    for e in gm.edges:
        m_by_label.setdefault(key(e), []).append(e)
    s_by_label: dict[int | str, list] = {}
    for e in gs.edges:
        s_by_label.setdefault(key(e), []).append(e)

    candidates: dict[int | str, list[EdgePairing]] = {}
    for label in sorted(set(m_by_label) & set(s_by_label), key=str):
        options = []
        for em in m_by_label[label]:
            for es in s_by_label[label]:
                obj_pair = None
                if em.dst not in m_dummy and es.dst not in s_dummy:
                    obj_pair = (em.dst, es.dst)
                options.append(EdgePairing(label, (em.src, es.src), obj_pair))
        candidates[label] = options
    return candidates


def brute_force_optimal_alignment(
    gm: AnswerGraph,
    gs: AnswerGraph,
    sigma: dict[Pair, float],
    size_bound: int = 10**6,
) -> OptimalAlignment:
    """Enumerate the Cartesian product of predicate-induced alignment sets and
    return the first combination maximizing the summed pair scores.

    Small-instance test oracle only; raises once the product exceeds the bound.
    """
    candidates = predicate_induced_candidates(gm, gs)
    option_lists = [candidates[label] for label in sorted(candidates, key=str)]
    total = 1
    for options in option_lists:
        total *= len(options)
        if total > size_bound:
            raise OracleSizeError(
                f"candidate product exceeds {size_bound}; refusing to enumerate"
            )
    if not option_lists:
        return OptimalAlignment((), 0.0)

    best: tuple[EdgePairing, ...] | None = None
    best_score = -1.0
    for combo in itertools.product(*option_lists):
        score = sum(p.score(sigma) for p in combo)
        if score > best_score:
            best, best_score = combo, score
    return OptimalAlignment(best, best_score)
