"""Model matching by persistent id, difference graphs and simple change graphs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from scgmine.errors import GraphError, TypeGraphMismatch
from scgmine.graph import LabeledGraph, connected_components
from scgmine.metamodel import TypeGraph, simple_component_metamodel, split_label


@dataclass(frozen=True)
class VersionedModel:
    """One model revision; node ids persist across revisions."""

    graph: LabeledGraph
    type_graph: TypeGraph = field(default_factory=simple_component_metamodel)

    def to_json(self) -> dict:
        g = self.graph
        return {
            "nodes": [{"id": n, "type": g.label(n)} for n in sorted(g.nodes)],
            "edges": [[s, l, t] for s, t, l in sorted(g.edges)],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, doc: dict, type_graph: TypeGraph | None = None) -> "VersionedModel":
        nodes = {int(n["id"]): n["type"] for n in doc["nodes"]}
        edges = [(int(s), int(t), l) for s, l, t in doc["edges"]]
        return cls(LabeledGraph(nodes, edges), type_graph or simple_component_metamodel())

    @classmethod
    def load(cls, path, type_graph: TypeGraph | None = None) -> "VersionedModel":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")), type_graph)


def _check_prefixes(g: LabeledGraph):
    kinds = {n: split_label(l)[0] for n, l in g.nodes.items()}
    for s, t, l in g.edges:
        k = split_label(l)[0]
        if k == "Add" and "Remove" in (kinds[s], kinds[t]):
            raise GraphError(f"Add edge {s}->{t} touches a Remove node")
        if k == "Remove" and "Add" in (kinds[s], kinds[t]):
            raise GraphError(f"Remove edge {s}->{t} touches an Add node")
    return kinds


class DifferenceGraph(LabeledGraph):
    """Union of two revisions with every element prefixed Add_/Remove_/Preserve_."""

    __slots__ = ()

    def __init__(self, nodes=None, edges=()):
        super().__init__(nodes, edges)
        _check_prefixes(self)

    @classmethod
    def of(cls, g: LabeledGraph) -> "DifferenceGraph":
        return g if isinstance(g, cls) else cls(g.nodes, g.edges)


class SimpleChangeGraph(LabeledGraph):
    """Changed elements plus the Preserve nodes anchoring changed edges."""

    __slots__ = ()

    def __init__(self, nodes=None, edges=()):
        super().__init__(nodes, edges)
        kinds = _check_prefixes(self)
        for s, t, l in self.edges:
            if split_label(l)[0] == "Preserve":
                raise GraphError(f"simple change graph contains unchanged edge {s}->{t} {l}")
        for n, k in kinds.items():
            if k == "Preserve" and self.degree(n) == 0:
                raise GraphError(f"Preserve node {n} is not incident to a changed edge")

    @classmethod
    def of(cls, g: LabeledGraph) -> "SimpleChangeGraph":
        return g if isinstance(g, cls) else cls(g.nodes, g.edges)


def compute_difference(m_old: VersionedModel, m_new: VersionedModel) -> DifferenceGraph:
    if m_old.type_graph != m_new.type_graph:
        raise TypeGraphMismatch("revisions are typed over different type graphs")
    old, new = m_old.graph, m_new.graph
    nodes = {}
    for n in old.nodes.keys() | new.nodes.keys():
        if n in old and n in new:
            if old.label(n) != new.label(n):
                raise GraphError(f"node {n} changes type from {old.label(n)} to {new.label(n)}")
            nodes[n] = "Preserve_" + old.label(n)
        elif n in old:
            nodes[n] = "Remove_" + old.label(n)
        else:
            nodes[n] = "Add_" + new.label(n)
    edges = [(s, t, "Preserve_" + l) for s, t, l in old.edges & new.edges]
    edges += [(s, t, "Remove_" + l) for s, t, l in old.edges - new.edges]
    edges += [(s, t, "Add_" + l) for s, t, l in new.edges - old.edges]
    return DifferenceGraph(nodes, edges)


def extract_scg(d: LabeledGraph) -> SimpleChangeGraph:
    changed_edges = [e for e in d.edges if not e[2].startswith("Preserve_")]
    keep = {n for n, l in d.nodes.items() if not l.startswith("Preserve_")}
    for s, t, _ in changed_edges:
        keep.add(s)
        keep.add(t)
    return SimpleChangeGraph({n: d.label(n) for n in keep}, changed_edges)


def scg_components(scg: LabeledGraph) -> list[SimpleChangeGraph]:
    return [SimpleChangeGraph.of(c) for c in connected_components(scg)]


def changed_element_count(d: LabeledGraph) -> int:
    return sum(not l.startswith("Preserve_") for l in d.nodes.values()) + sum(
        not e[2].startswith("Preserve_") for e in d.edges
    )
