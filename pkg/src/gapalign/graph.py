"""Directed labeled answer graphs built from subject-predicate-object triples.

Each triple contributes one edge from its subject node to its object node with
the predicate as label.  A triple without an object gets a fresh dummy target
node; dummy nodes are ignored during alignment but kept for rendering.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import CoverageError, EmptyInputError


def normalize_phrase(text: str) -> str:
    """Trim and collapse internal whitespace; case is preserved."""
    return " ".join(text.split())


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: str | None = None

    def __post_init__(self):
        subject = normalize_phrase(self.subject)
        predicate = normalize_phrase(self.predicate)
        obj = self.object
        if obj is not None:
            obj = normalize_phrase(obj)
            if not obj:
                obj = None
        if not subject:
            raise ValueError("triple subject is empty after whitespace normalization")
        if not predicate:
            raise ValueError("triple predicate is empty after whitespace normalization")
        object.__setattr__(self, "subject", subject)
        object.__setattr__(self, "predicate", predicate)
        object.__setattr__(self, "object", obj)


@dataclass(frozen=True)
class Node:
    id: int
    phrase: str
    is_dummy: bool = False


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    predicate: str
    label: int | None = None  # cluster id once canonicalized


@dataclass(frozen=True)
class AnswerGraph:
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]

    def node(self, node_id: int) -> Node:
        return self.nodes[node_id]

    def real_nodes(self) -> tuple[Node, ...]:
        return tuple(n for n in self.nodes if not n.is_dummy)

    def predicates(self) -> set[str]:
        return {e.predicate for e in self.edges}

    def is_canonical(self) -> bool:
        return all(e.label is not None for e in self.edges)

    def out_edges(self, node_id: int) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.src == node_id)

    def in_edges(self, node_id: int) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.dst == node_id)


def build_graph(triples: list[Triple]) -> AnswerGraph:
    """One node per distinct normalized phrase, one edge per triple.

    Node ids follow first appearance; absent objects become dummy nodes.
    """
    if not triples:
        raise EmptyInputError("cannot build an answer graph from zero triples")
    nodes: list[Node] = []
    by_phrase: dict[str, int] = {}

    def intern(phrase: str) -> int:
        if phrase not in by_phrase:
            by_phrase[phrase] = len(nodes)
            nodes.append(Node(len(nodes), phrase))
        return by_phrase[phrase]

    edges: list[Edge] = []
    for t in triples:
        src = intern(t.subject)
        if t.object is None:
            dst = len(nodes)
            nodes.append(Node(dst, "", is_dummy=True))
        else:
            dst = intern(t.object)
        edges.append(Edge(src, dst, t.predicate))
    return AnswerGraph(tuple(nodes), tuple(edges))


def canonicalize(graph: AnswerGraph, clustering) -> AnswerGraph:
    """Replace every edge label with its predicate's cluster id.

    The surface predicate is retained for gap rendering.  `clustering` is any
    object with an `assignment` mapping of predicate -> cluster id.
    """
    assignment = clustering.assignment
    new_edges = []
    for e in graph.edges:
        if e.predicate not in assignment:
            raise CoverageError(f"predicate {e.predicate!r} is not covered by the clustering")
        new_edges.append(replace(e, label=assignment[e.predicate]))
    return AnswerGraph(graph.nodes, tuple(new_edges))
