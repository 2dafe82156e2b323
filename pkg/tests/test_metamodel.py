import json

import pytest

from scgmine.errors import MalformedLabelError
from scgmine.graph import LabeledGraph
from scgmine.metamodel import (
    TypeGraph,
    simple_component_metamodel,
    split_label,
    strip_prefixes,
    validate_scg_typing,
    validate_typing,
)

TG = simple_component_metamodel()


def rules_of(violations):
    return sorted(v.rule for v in violations)


def test_builtin_metamodel_shape():
    assert TG.node_types == {"Package", "Component", "SwImplementation", "Port", "Connector", "Requirement"}
    assert len(TG.edge_types) == 8
    assert ("Component", "port", "Port") in TG.edge_types
    assert ("Component", "requirement", "Requirement") in TG.edge_types
    assert ("Package", "connector", "Connector") in TG.edge_types


def test_typegraph_invariants():
    with pytest.raises(ValueError):
        TypeGraph(frozenset({"A"}), frozenset({("A", "r", "B")}))
    with pytest.raises(ValueError):
        TypeGraph(frozenset({"A"}), frozenset({("A", "", "A")}))


def test_typegraph_json_roundtrip(tmp_path):
    doc = TG.to_json()
    assert TypeGraph.from_json(doc) == TG
    assert TypeGraph.from_json(json.dumps(doc)) == TG
    p = tmp_path / "tg.json"
    p.write_text(json.dumps(doc))
    assert TypeGraph.from_json(p) == TG


def test_validate_typing_examples():
    ok = LabeledGraph({0: "Component", 1: "Port"}, [(0, 1, "port")])
    bad = LabeledGraph({0: "Component", 1: "Requirement"}, [(0, 1, "port")])
    assert validate_typing(ok, TG) == []
    assert len(validate_typing(bad, TG)) == 1
    assert validate_typing(LabeledGraph(), TG) == []
    assert rules_of(validate_typing(LabeledGraph({0: "Widget"}), TG)) == ["node-type"]


def test_validate_typing_monotone():
    g = LabeledGraph({0: "Component", 1: "Requirement"}, [(0, 1, "port")])
    bigger = TypeGraph(TG.node_types, TG.edge_types | {("Component", "port", "Requirement")})
    assert validate_typing(g, bigger) == []
    assert len(validate_typing(g, TG)) == 1


def test_listing_graph_valid():
    g = LabeledGraph({0: "Add_Component", 1: "Add_Port", 2: "Add_Requirement"},
                     [(0, 1, "Add_port"), (0, 2, "Add_requirement")])
    assert validate_scg_typing(g, TG) == []


def test_change_consistency_rules():
    g = LabeledGraph({0: "Remove_Component", 1: "Add_Port"}, [(0, 1, "Add_port")])
    assert "add-touches-remove" in rules_of(validate_scg_typing(g, TG))
    g = LabeledGraph({0: "Add_Component", 1: "Preserve_Port"}, [(0, 1, "Remove_port")])
    assert "remove-touches-add" in rules_of(validate_scg_typing(g, TG))
    g = LabeledGraph({0: "Preserve_Component", 1: "Preserve_Port"}, [(0, 1, "Preserve_port")])
    assert "preserve-edge" in rules_of(validate_scg_typing(g, TG))
    assert rules_of(validate_scg_typing(LabeledGraph({0: "Preserve_Package"}), TG)) == ["isolated-preserve"]


def test_scg_typing_implies_plain_typing():
    g = LabeledGraph({0: "Preserve_Package", 1: "Add_Component"}, [(0, 1, "Add_component")])
    assert validate_scg_typing(g, TG) == []
    assert validate_typing(strip_prefixes(g), TG) == []


@pytest.mark.parametrize("label", ["Component", "Keep_Component", "Add_", "add_Component"])
def test_malformed_labels(label):
    with pytest.raises(MalformedLabelError):
        split_label(label)
    with pytest.raises(MalformedLabelError):
        validate_scg_typing(LabeledGraph({0: label}), TG)


def test_split_label_keeps_underscores_in_type():
    assert split_label("Add_Sw_Thing") == ("Add", "Sw_Thing")
