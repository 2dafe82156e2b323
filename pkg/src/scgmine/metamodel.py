"""Type graphs, typing validation and the built-in component metamodel."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from scgmine.errors import GraphError, MalformedLabelError
from scgmine.graph import LabeledGraph

CHANGE_PREFIXES = ("Add", "Remove", "Preserve")


@dataclass(frozen=True)
class TypeGraph:
    node_types: frozenset
    edge_types: frozenset  # of (src_type, edge_label, tgt_type)

    def __post_init__(self):
        object.__setattr__(self, "node_types", frozenset(self.node_types))
        object.__setattr__(self, "edge_types", frozenset(tuple(t) for t in self.edge_types))
        for t in self.node_types:
            if not t:
                raise GraphError("empty node type")
        for src, label, tgt in self.edge_types:
            if not label:
                raise GraphError("empty edge label in type graph")
            if src not in self.node_types or tgt not in self.node_types:
                raise GraphError(f"edge type ({src}, {label}, {tgt}) references an unknown node type")

    @classmethod
    def from_json(cls, doc: dict | str | Path) -> "TypeGraph":
        """Load ``{"node_types": [...], "edge_types": [[src, label, tgt], ...]}``."""
        if isinstance(doc, Path) or (isinstance(doc, str) and not doc.lstrip().startswith("{")):
            doc = json.loads(Path(doc).read_text(encoding="utf-8"))
        elif isinstance(doc, str):
            doc = json.loads(doc)
        return cls(frozenset(doc["node_types"]), frozenset(tuple(t) for t in doc["edge_types"]))

    def to_json(self) -> dict:
        return {
            "node_types": sorted(self.node_types),
            "edge_types": [list(t) for t in sorted(self.edge_types)],
        }


@dataclass(frozen=True)
class Violation:
    rule: str
    element: tuple
    message: str

    def __str__(self):
        return f"[{self.rule}] {self.message}"


def simple_component_metamodel() -> TypeGraph:
    return TypeGraph(
        frozenset({"Package", "Component", "SwImplementation", "Port", "Connector", "Requirement"}),
        frozenset({
            ("Package", "subpackage", "Package"),
            ("Package", "component", "Component"),
            ("Package", "connector", "Connector"),
            ("Component", "implementation", "SwImplementation"),
            ("Component", "port", "Port"),
            ("Component", "requirement", "Requirement"),
            ("Connector", "src", "Port"),
            ("Connector", "tgt", "Port"),
        }),
    )


def validate_typing(g: LabeledGraph, tg: TypeGraph) -> list[Violation]:
    out = []
    for nid in sorted(g.nodes):
        label = g.label(nid)
        if label not in tg.node_types:
            out.append(Violation("node-type", (nid,), f"node {nid} has unknown type {label}"))
    for src, tgt, label in sorted(g.edges):
        triple = (g.label(src), label, g.label(tgt))
        if triple not in tg.edge_types:
            out.append(Violation("edge-type", (src, tgt, label), f"edge {src}->{tgt} {triple} is not permitted"))
    return out


def split_label(label: str) -> tuple[str, str]:
    """``"Add_Component"`` -> ``("Add", "Component")``."""
    prefix, sep, rest = label.partition("_")
    if not sep or prefix not in CHANGE_PREFIXES or not rest:
        raise MalformedLabelError(f"label {label!r} lacks an Add_/Remove_/Preserve_ prefix")
    return prefix, rest


def strip_prefixes(g: LabeledGraph) -> LabeledGraph:
    strip = lambda l: split_label(l)[1]
    return g.map_labels(strip, strip)


def validate_scg_typing(scg: LabeledGraph, tg: TypeGraph) -> list[Violation]:
    """Typing plus change-consistency checks for a prefixed change graph."""
    node_prefix = {n: split_label(l)[0] for n, l in scg.nodes.items()}
    edge_prefix = {e: split_label(e[2])[0] for e in scg.edges}
    out = validate_typing(strip_prefixes(scg), tg)
    for e in sorted(scg.edges):
        src, tgt, label = e
        kind = edge_prefix[e]
        ends = (node_prefix[src], node_prefix[tgt])
        if kind == "Add" and "Remove" in ends:
            out.append(Violation("add-touches-remove", e, f"Add edge {src}->{tgt} touches a Remove node"))
        elif kind == "Remove" and "Add" in ends:
            out.append(Violation("remove-touches-add", e, f"Remove edge {src}->{tgt} touches an Add node"))
        elif kind == "Preserve":
            out.append(Violation("preserve-edge", e, f"edge {src}->{tgt} {label} is unchanged"))
    for nid in sorted(scg.nodes):
        if node_prefix[nid] == "Preserve" and scg.degree(nid) == 0:
            out.append(Violation("isolated-preserve", (nid,), f"Preserve node {nid} has no incident changed edge"))
    return out
