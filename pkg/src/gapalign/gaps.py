"""Gap inference over a filtered alignment.

A model node is missing when it has no surviving pair; under the best filter a
node aligned below tau also counts as weak.  Four cases produce gaps:

  1. missing node without neighbors            -> node gap
  2. edge with both endpoints missing          -> edge gap
  3. (best only) weakly aligned leaf node      -> node gap
  4. (best only) edge with both endpoints weak -> edge gap

Model content that stays uncovered because its edge partner is aligned is still
missing from the student answer, so it surfaces as a residual node gap.  Dummy
nodes never yield gaps and vanish from edge-gap renderings.
"""

from __future__ import annotations

from dataclasses import dataclass

from .filters import BEST, FilteredAlignment
from .graph import AnswerGraph, Edge

INCIDENT = "incident"
OUTGOING = "outgoing"
NEIGHBOR_MODES = (INCIDENT, OUTGOING)


@dataclass(frozen=True)
class Gap:
    text: str
    kind: str  # "node" | "edge"
    case_tag: str  # "1" | "2" | "3" | "4" | "residual"
    source: tuple[int, ...]  # node ids involved

    def as_dict(self) -> dict:
        return {"text": self.text, "kind": self.kind, "case": self.case_tag}


def render_edge(graph: AnswerGraph, edge: Edge) -> str:
    subject = graph.node(edge.src).phrase
    obj_node = graph.node(edge.dst)
    parts = [subject, edge.predicate]
    if not obj_node.is_dummy:
        parts.append(obj_node.phrase)
    return " ".join(" ".join(parts).split())


def detect_gaps(
    gm: AnswerGraph,
    alignment: FilteredAlignment,
    tau: float,
    neighbor_mode: str = INCIDENT,
) -> list[Gap]:
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    if neighbor_mode not in NEIGHBOR_MODES:
        raise ValueError(f"neighbor_mode must be one of {NEIGHBOR_MODES}")
    is_best = alignment.kind == BEST

    aligned: set[int] = alignment.model_nodes()
    weak: set[int] = set()
    if is_best:
        weak = {m for m in aligned if alignment.score_of(m) < tau}

    def missing(node_id: int) -> bool:
        return node_id not in aligned

    def weakly_aligned(node_id: int) -> bool:
        return node_id in weak

    def eligible(node_id: int) -> bool:
        return missing(node_id) or weakly_aligned(node_id)

    def has_neighbor(node_id: int) -> bool:
        if neighbor_mode == OUTGOING:
            return any(e.src == node_id for e in gm.edges)
        return any(node_id in (e.src, e.dst) for e in gm.edges)

    gaps: list[Gap] = []
    consumed: set[int] = set()

    # edge cases first so their endpoints cannot re-surface as node gaps
    for edge in gm.edges:
        dst_node = gm.node(edge.dst)
        endpoints = [edge.src] + ([] if dst_node.is_dummy else [edge.dst])
        if all(missing(n) for n in endpoints):
            tag = "2"
        elif is_best and all(weakly_aligned(n) for n in endpoints):
            tag = "4"
        else:
            continue
        gaps.append(Gap(render_edge(gm, edge), "edge", tag, tuple(endpoints)))
        consumed.update(endpoints)

    for node in gm.real_nodes():
        if node.id in consumed or not eligible(node.id):
            continue
        if not has_neighbor(node.id):
            tag = "1" if missing(node.id) else "3"
        else:
            tag = "residual"
        gaps.append(Gap(node.phrase, "node", tag, (node.id,)))

    # identical rendered texts collapse to one gap
    unique: list[Gap] = []
    seen_texts: set[str] = set()
    for gap in gaps:
        if gap.text not in seen_texts:
            seen_texts.add(gap.text)
            unique.append(gap)
    return unique
