"""Synthetic model repositories with a ground-truth log of applied edit rules.

Each revision applies ``e`` rule applications to the previous one. Within a
revision, applications use pairwise disjoint context nodes and never anchor
on elements created in the same revision, so at perturbation probability 0
every difference decomposes into one component per application.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import asdict, dataclass, field
from itertools import product
from pathlib import Path

from scgmine.diff import SimpleChangeGraph, VersionedModel
from scgmine.errors import MissingArtifactError, NoMatchError
from scgmine.graph import LabeledGraph
from scgmine.metamodel import TypeGraph, simple_component_metamodel, split_label

MAX_RETRIES = 50

DEFAULT_PROFILE = {
    "Package": 85,
    "Component": 85,
    "SwImplementation": 85,
    "Port": 170,
    "Connector": 85,
    "Requirement": 170,
}

GRID_E = (11, 31, 51, 81)
GRID_D = (10, 20)
GRID_P = (0.0, 0.5, 1.0)


@dataclass(frozen=True)
class EditRule:
    """An additive rewrite rule given by its simple change graph."""

    name: str
    pattern: SimpleChangeGraph

    def __post_init__(self):
        for label in list(self.pattern.nodes.values()) + [l for _, _, l in self.pattern.edges]:
            if split_label(label)[0] == "Remove":
                raise ValueError(f"rule {self.name}: only additive rules are supported")

    @property
    def context(self) -> list[tuple[int, str]]:
        return [(n, split_label(l)[1]) for n, l in sorted(self.pattern.nodes.items()) if l.startswith("Preserve_")]

    @property
    def created(self) -> list[tuple[int, str]]:
        return [(n, split_label(l)[1]) for n, l in sorted(self.pattern.nodes.items()) if l.startswith("Add_")]


def _rule(name, nodes, edges):
    return EditRule(name, SimpleChangeGraph(nodes, [(s, t, "Add_" + l) for s, t, l in edges]))


def builtin_rules() -> list[EditRule]:
    return [
        _rule(
            "AddComponent",
            {0: "Preserve_Package", 1: "Add_Component", 2: "Add_SwImplementation", 3: "Add_Requirement"},
            [(0, 1, "component"), (1, 2, "implementation"), (1, 3, "requirement")],
        ),
        _rule(
            "AddInterface",
            {0: "Preserve_Component", 1: "Preserve_Component", 2: "Preserve_Package",
             3: "Add_Port", 4: "Add_Port", 5: "Add_Connector"},
            [(0, 3, "port"), (1, 4, "port"), (2, 5, "connector"), (5, 3, "src"), (5, 4, "tgt")],
        ),
        _rule(
            "AddPackageWithComponent",
            {0: "Preserve_Package", 1: "Add_Package", 2: "Add_Component", 3: "Add_SwImplementation"},
            [(0, 1, "subpackage"), (1, 2, "component"), (2, 3, "implementation")],
        ),
    ]


@dataclass(frozen=True)
class SimulationConfig:
    revisions: int
    ops_per_revision: int
    perturbation_prob: float = 0.0
    seed: int = 0
    initial_size: dict = field(default_factory=lambda: dict(DEFAULT_PROFILE))

    def __post_init__(self):
        if self.revisions < 1 or self.ops_per_revision < 1:
            raise ValueError("revisions and ops_per_revision must be >= 1")
        if not 0.0 <= self.perturbation_prob <= 1.0:
            raise ValueError("perturbation_prob must lie in [0, 1]")

    @property
    def name(self) -> str:
        return f"e{self.ops_per_revision}_d{self.revisions}_p{self.perturbation_prob:g}"

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, doc: dict) -> "SimulationConfig":
        return cls(
            revisions=int(doc["revisions"]),
            ops_per_revision=int(doc["ops_per_revision"]),
            perturbation_prob=float(doc.get("perturbation_prob", 0.0)),
            seed=int(doc.get("seed", 0)),
            initial_size=dict(doc.get("initial_size") or DEFAULT_PROFILE),
        )


def derive_seed(master: int, *parts) -> int:
    key = ":".join(str(p) for p in (master, *parts)).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") >> 1


def dataset_grid(master_seed: int = 0) -> list[SimulationConfig]:
    return [
        SimulationConfig(d, e, p, derive_seed(master_seed, "grid", e, d, p))
        for e, d, p in product(GRID_E, GRID_D, GRID_P)
    ]


class _Model:
    """Mutable model under simulation."""

    def __init__(self, nodes=None, edges=None):
        self.nodes = dict(nodes or {})
        self.edges = set(edges or ())
        self.next_id = max(self.nodes, default=-1) + 1
        self.by_type: dict[str, list[int]] = {}
        for n in sorted(self.nodes):
            self.by_type.setdefault(self.nodes[n], []).append(n)

    @classmethod
    def of(cls, m: VersionedModel) -> "_Model":
        return cls(m.graph.nodes, m.graph.edges)

    def add_node(self, type_name: str) -> int:
        n = self.next_id
        self.next_id += 1
        self.nodes[n] = type_name
        self.by_type.setdefault(type_name, []).append(n)
        return n

    def add_edge(self, src, label, tgt):
        self.edges.add((src, tgt, label))

    def snapshot(self, tg: TypeGraph) -> VersionedModel:
        return VersionedModel(LabeledGraph(self.nodes, self.edges), tg)


def initial_model(profile: dict | None = None) -> _Model:
    """Packages owning components, each with implementation, ports and requirements."""
    counts = {**DEFAULT_PROFILE, **(profile or {})}
    m = _Model()
    packages = [m.add_node("Package") for _ in range(counts["Package"])]
    roots = max(1, min(5, len(packages)))
    for i in range(roots, len(packages)):
        m.add_edge(packages[(i - roots) // 4], "subpackage", packages[i])
    components = [m.add_node("Component") for _ in range(counts["Component"])]
    for i, c in enumerate(components):
        m.add_edge(packages[i % len(packages)], "component", c)
    for i in range(counts["SwImplementation"]):
        if components:
            m.add_edge(components[i % len(components)], "implementation", m.add_node("SwImplementation"))
    ports = []
    for i in range(counts["Port"]):
        p = m.add_node("Port")
        ports.append(p)
        if components:
            m.add_edge(components[(i // 2) % len(components)], "port", p)
    for i in range(counts["Connector"]):
        k = m.add_node("Connector")
        if packages:
            m.add_edge(packages[i % len(packages)], "connector", k)
        if ports:
            m.add_edge(k, "src", ports[(2 * i) % len(ports)])
            m.add_edge(k, "tgt", ports[(2 * i + 1) % len(ports)])
    for i in range(counts["Requirement"]):
        r = m.add_node("Requirement")
        if components:
            m.add_edge(components[(i // 2) % len(components)], "requirement", r)
    return m


def _apply(m: _Model, rule: EditRule, rng: random.Random, exclude) -> dict:
    needed: dict[str, list[int]] = {}
    for pid, type_name in rule.context:
        needed.setdefault(type_name, []).append(pid)
    matched = {}
    for type_name in sorted(needed):
        pool = [n for n in m.by_type.get(type_name, ()) if n not in exclude]
        if len(pool) < len(needed[type_name]):
            raise NoMatchError(f"{rule.name}: not enough {type_name} nodes for a context match")
        for pid, n in zip(needed[type_name], rng.sample(pool, len(needed[type_name]))):
            matched[pid] = n
    created = {pid: m.add_node(type_name) for pid, type_name in rule.created}
    ids = {**matched, **created}
    for s, t, l in sorted(rule.pattern.edges):
        m.add_edge(ids[s], split_label(l)[1], ids[t])
    return {
        "rule": rule.name,
        "matched": [matched[p] for p in sorted(matched)],
        "created": [created[p] for p in sorted(created)],
        "perturbed": False,
        "perturbation": None,
        "perturbation_created": [],
    }


def apply_rule(m: VersionedModel, r: EditRule, rng: random.Random, exclude=frozenset()):
    """Apply ``r`` at a uniformly random context match avoiding ``exclude``."""
    work = _Model.of(m)
    record = _apply(work, r, rng, exclude)
    return work.snapshot(m.type_graph), record


def _created_of_type(m: _Model, record, type_name):
    return [n for n in record["created"] if m.nodes[n] == type_name]


def _perturb(m: _Model, record: dict, rng: random.Random):
    """Apply one extra operation overlapping the elements ``record`` created."""
    comps = _created_of_type(m, record, "Component")
    ports = _created_of_type(m, record, "Port")
    options = []
    if comps:
        options += ["ExtraRequirement", "ExtraPort"]
    if ports:
        options.append("ExtraConnector")
    if not options:
        return
    kind = rng.choice(options)
    if kind == "ExtraRequirement":
        c = rng.choice(comps)
        new = [m.add_node("Requirement")]
        m.add_edge(c, "requirement", new[0])
    elif kind == "ExtraPort":
        c = rng.choice(comps)
        new = [m.add_node("Port")]
        m.add_edge(c, "port", new[0])
    else:
        p = rng.choice(ports)
        others = [q for q in m.by_type["Port"] if q != p]
        q = rng.choice(others)
        owners = [n for n in record["matched"] if m.nodes[n] == "Package"] or m.by_type["Package"]
        k = m.add_node("Connector")
        m.add_edge(owners[0], "connector", k)
        m.add_edge(k, "src", p)
        m.add_edge(k, "tgt", q)
        new = [k]
    record["perturbed"] = True
    record["perturbation"] = kind
    record["perturbation_created"] = new


def simulate_repository(config: SimulationConfig, rules: list[EditRule] | None = None,
                        type_graph: TypeGraph | None = None):
    """Return ``(models, log)``: ``revisions + 1`` models and one log list per pair."""
    rules = rules or builtin_rules()
    tg = type_graph or simple_component_metamodel()
    rng = random.Random(config.seed)
    m = initial_model(config.initial_size)
    models = [m.snapshot(tg)]
    log = []
    for _ in range(config.revisions):
        start_id = m.next_id
        used = set()
        entries = []
        for _ in range(config.ops_per_revision):
            for _attempt in range(MAX_RETRIES):
                rule = rng.choice(rules)
                fresh = _FreshView(used, start_id)
                try:
                    record = _apply(m, rule, rng, fresh)
                    break
                except NoMatchError:
                    continue
            else:
                raise NoMatchError(f"no applicable rule after {MAX_RETRIES} attempts")
            used.update(record["matched"])
            if config.perturbation_prob > 0 and rng.random() < config.perturbation_prob:
                _perturb(m, record, rng)
            entries.append(record)
        log.append(entries)
        models.append(m.snapshot(tg))
    return models, log


class _FreshView:
    """Exclusion set: used anchors plus anything created this revision."""

    def __init__(self, used, start_id):
        self.used = used
        self.start_id = start_id

    def __contains__(self, n):
        return n >= self.start_id or n in self.used


# -- repository directories -------------------------------------------------

def write_repository(out_dir, models, log, config: SimulationConfig):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, model in enumerate(models):
        (out / f"rev_{i:04d}.json").write_text(model.dumps(), encoding="utf-8")
    (out / "ground_truth.json").write_text(json.dumps({"pairs": log}, indent=1) + "\n", encoding="utf-8")
    (out / "config.json").write_text(json.dumps(config.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def revision_paths(repo_dir) -> list[Path]:
    paths = sorted(Path(repo_dir).glob("rev_*.json"))
    if not paths:
        raise MissingArtifactError(Path(repo_dir) / "rev_0000.json")
    return paths


def load_repository(repo_dir, type_graph: TypeGraph | None = None):
    """Return ``(models, log, config)``; log and config are ``None`` if absent."""
    repo = Path(repo_dir)
    models = [VersionedModel.load(p, type_graph) for p in revision_paths(repo)]
    gt = repo / "ground_truth.json"
    log = json.loads(gt.read_text(encoding="utf-8"))["pairs"] if gt.exists() else None
    cfg = repo / "config.json"
    config = SimulationConfig.from_json(json.loads(cfg.read_text(encoding="utf-8"))) if cfg.exists() else None
    return models, log, config
