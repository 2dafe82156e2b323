"""EdgeList serialization of labeled graphs.

A document is a header line ``t # <graph_id>`` followed by one line per edge::

    e <src_id> <tgt_id> <edge_label> <src_label> <tgt_label>

Node labels are repeated on every edge, so a node id must carry the same
label everywhere in a document.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import NamedTuple

from scgmine.errors import (
    DuplicateEdge,
    EdgeListError,
    GraphError,
    IdLabelInconsistency,
    MalformedEdgeLine,
    MalformedHeader,
    WhitespaceInLabel,
)
from scgmine.graph import LabeledGraph


class EdgeRecord(NamedTuple):
    src: int
    tgt: int
    edge_label: str
    src_label: str
    tgt_label: str

    def line(self) -> str:
        return f"e {self.src} {self.tgt} {self.edge_label} {self.src_label} {self.tgt_label}\n"


def _dfs(g: LabeledGraph, rng: random.Random | None):
    """Edge order plus node discovery order (the serialized ids)."""
    emitted = set()
    order = []
    discovered = {}

    def discover(n):
        if n not in discovered:
            discovered[n] = len(discovered)

    def next_edge(node):
        best = None
        for t, l in g.out_edges(node):
            e = (node, t, l)
            if e not in emitted:
                key = rng.random() if rng else (0, l, g.label(t), (0, discovered[t]) if t in discovered else (1, t))
                if best is None or key < best[0]:
                    best = (key, e)
        for s, l in g.in_edges(node):
            e = (s, node, l)
            if e not in emitted:
                key = rng.random() if rng else (1, l, g.label(s), (0, discovered[s]) if s in discovered else (1, s))
                if best is None or key < best[0]:
                    best = (key, e)
        return None if best is None else best[1]

    roots = sorted((g.label(n), n) for n in g.nodes if g.degree(n))
    if rng:
        rng.shuffle(roots)
    for _, root in roots:
        if root in discovered:
            continue
        # the root takes the lowest id of its component even when its first
        # edge is incoming, so a reparsed document picks the same root
        discover(root)
        stack = [root]
        while stack:
            node = stack[-1]
            e = next_edge(node)
            if e is None:
                stack.pop()
                continue
            emitted.add(e)
            order.append(e)
            other = e[1] if e[0] == node else e[0]
            if other not in discovered:
                discover(other)
                stack.append(other)
    return order, discovered


def dfs_edge_order(g: LabeledGraph, rng: random.Random | None = None) -> list[tuple]:
    """Depth-first edge order, edges traversable both ways.

    Roots are the undiscovered node with the smallest ``(label, id)``. At a
    node the next edge minimizes ``(incoming?, edge label, neighbor label,
    neighbor rank)``, where already-discovered neighbors rank by discovery
    order ahead of undiscovered ones ranked by id. Discovery order is exactly
    the id assignment of :func:`serialize`, which makes re-serializing a
    parsed document byte-identical.

    With ``rng`` the roots and every edge choice are random instead, which
    yields one of the alternative orderings used for augmentation.
    """
    return _dfs(g, rng)[0]


def _check_label(label: str):
    if not label or any(c.isspace() for c in label):
        raise WhitespaceInLabel(f"label {label!r} is empty or contains whitespace")


def to_records(g: LabeledGraph, rng: random.Random | None = None) -> list[EdgeRecord]:
    """Edge records in DFS order with ids renumbered by discovery."""
    if g.num_edges == 0:
        raise GraphError("cannot serialize a graph without edges")
    isolated = [n for n in g.nodes if g.degree(n) == 0]
    if isolated:
        raise GraphError(f"EdgeList cannot represent isolated nodes {sorted(isolated)}")
    for l in g.nodes.values():
        _check_label(l)
    for _, _, l in g.edges:
        _check_label(l)
    order, ids = _dfs(g, rng)
    records = []
    for s, t, l in order:
        records.append(EdgeRecord(ids[s], ids[t], l, g.label(s), g.label(t)))
    return records


def header(graph_id: int) -> str:
    return f"t # {graph_id}\n"


def serialize(g: LabeledGraph, graph_id: int = 0, rng: random.Random | None = None) -> str:
    """EdgeList text of ``g``; ``rng`` selects a random DFS ordering."""
    return header(graph_id) + "".join(r.line() for r in to_records(g, rng))


def _parse_header(line: str) -> int:
    parts = line.split(" ")
    if len(parts) != 3 or parts[0] != "t" or parts[1] != "#" or not parts[2].isdigit():
        raise MalformedHeader(f"expected 't # <graph_id>', got {line!r}")
    return int(parts[2])


def parse_edge_line(line: str) -> EdgeRecord:
    parts = line.split(" ")
    if len(parts) != 6 or parts[0] != "e":
        raise MalformedEdgeLine(f"expected 'e <src> <tgt> <label> <src_label> <tgt_label>', got {line!r}")
    if not (parts[1].isdigit() and parts[2].isdigit()):
        raise MalformedEdgeLine(f"non-integer node id in {line!r}")
    if not all(parts[3:]):
        raise MalformedEdgeLine(f"empty label in {line!r}")
    return EdgeRecord(int(parts[1]), int(parts[2]), parts[3], parts[4], parts[5])


@dataclass
class EdgeListDocument:
    """An EdgeList document held as records, with its id-to-label table."""

    graph_id: int = 0
    records: list = field(default_factory=list)
    labels: dict = field(default_factory=dict)
    _edges: set = field(default_factory=set, repr=False)

    def check(self, rec: EdgeRecord) -> EdgeListError | None:
        for nid, label in ((rec.src, rec.src_label), (rec.tgt, rec.tgt_label)):
            known = self.labels.get(nid)
            if known is not None and known != label:
                return IdLabelInconsistency(f"node {nid} labeled {known} and {label}")
        if rec.src == rec.tgt and rec.src_label != rec.tgt_label:
            return IdLabelInconsistency(f"node {rec.src} labeled {rec.src_label} and {rec.tgt_label}")
        if (rec.src, rec.tgt, rec.edge_label) in self._edges:
            return DuplicateEdge(f"edge {rec.src}->{rec.tgt} {rec.edge_label} already present")
        return None

    def append(self, rec: EdgeRecord):
        err = self.check(rec)
        if err is not None:
            raise err
        self.records.append(rec)
        self.labels[rec.src] = rec.src_label
        self.labels[rec.tgt] = rec.tgt_label
        self._edges.add((rec.src, rec.tgt, rec.edge_label))

    def extended(self, rec: EdgeRecord) -> "EdgeListDocument":
        doc = EdgeListDocument(self.graph_id, list(self.records), dict(self.labels), set(self._edges))
        doc.append(rec)
        return doc

    @property
    def num_edges(self) -> int:
        return len(self.records)

    def text(self) -> str:
        return header(self.graph_id) + "".join(r.line() for r in self.records)

    def to_graph(self) -> LabeledGraph:
        return LabeledGraph(self.labels, self._edges)

    @classmethod
    def from_text(cls, text: str) -> "EdgeListDocument":
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise MalformedHeader("empty document")
        doc = cls(_parse_header(lines[0]))
        for line in lines[1:]:
            doc.append(parse_edge_line(line))
        return doc

    @classmethod
    def from_graph(cls, g: LabeledGraph, graph_id: int = 0) -> "EdgeListDocument":
        doc = cls(graph_id)
        if g.num_edges:
            for rec in to_records(g):
                doc.append(rec)
        return doc


def parse(text: str) -> tuple[int, LabeledGraph]:
    doc = EdgeListDocument.from_text(text)
    return doc.graph_id, doc.to_graph()


def validate_line_extension(doc: EdgeListDocument, line: str) -> EdgeListError | None:
    """Verdict on appending ``line`` to ``doc``: ``None`` if acceptable."""
    line = line[:-1] if line.endswith("\n") else line
    try:
        rec = parse_edge_line(line)
    except EdgeListError as err:
        return err
    return doc.check(rec)


def split_documents(text: str) -> list[str]:
    """Split a concatenated corpus into individual documents."""
    docs = []
    current = []
    for line in text.splitlines(keepends=True):
        if line.startswith("t ") and current:
            docs.append("".join(current))
            current = []
        current.append(line)
    if current:
        docs.append("".join(current))
    return docs


def parse_corpus(text: str) -> list[tuple[int, LabeledGraph]]:
    return [parse(d) for d in split_documents(text)]
