"""Random graph factories and brute-force oracles shared by the tests."""

from __future__ import annotations

import itertools
import random

from scgmine.graph import LabeledGraph

TYPES = ["Package", "Component", "SwImplementation", "Port", "Connector", "Requirement"]


def random_graph(rng: random.Random, n_min=2, n_max=6, node_labels=("A", "B"), edge_labels=("r", "s"),
                 density=0.35, loops=False, no_isolated=False) -> LabeledGraph:
    n = rng.randint(n_min, n_max)
    nodes = {i: rng.choice(node_labels) for i in range(n)}
    edges = set()
    for s in range(n):
        for t in range(n):
            if s == t and not loops:
                continue
            for lab in edge_labels:
                if rng.random() < density / len(edge_labels):
                    edges.add((s, t, lab))
    if no_isolated:
        touched = {s for s, _, _ in edges} | {t for _, t, _ in edges}
        for v in range(n):
            if v not in touched:
                u = rng.choice([x for x in range(n) if x != v]) if n > 1 else v
                edges.add((v, u, rng.choice(edge_labels)) if rng.random() < 0.5 else (u, v, rng.choice(edge_labels)))
    return LabeledGraph(nodes, edges)


def random_typed_graph(rng: random.Random, n_min=5, n_max=50) -> LabeledGraph:
    """A prefixed change-graph-like labeling with no isolated nodes."""
    prefixes = ["Add", "Remove", "Preserve"]
    labels = [f"{p}_{t}" for p in prefixes for t in TYPES]
    elabels = [f"{p}_{e}" for p in ("Add", "Remove") for e in ("port", "src", "tgt", "component", "requirement")]
    return random_graph(rng, n_min, n_max, labels, elabels, density=3.0 / n_max, no_isolated=True)


def permuted(g: LabeledGraph, rng: random.Random, offset=0) -> LabeledGraph:
    ids = sorted(g.nodes)
    targets = [i + offset for i in ids]
    rng.shuffle(targets)
    return g.relabel(dict(zip(ids, targets)))


def brute_isomorphic(g1: LabeledGraph, g2: LabeledGraph) -> bool:
    """Try every bijection; factorial time, only for tiny graphs."""
    if g1.num_nodes != g2.num_nodes or g1.num_edges != g2.num_edges:
        return False
    a, b = sorted(g1.nodes), sorted(g2.nodes)
    e1, e2 = g1.edges, g2.edges
    for perm in itertools.permutations(b):
        m = dict(zip(a, perm))
        if any(g1.label(x) != g2.label(m[x]) for x in a):
            continue
        if {(m[s], m[t], lab) for s, t, lab in e1} == e2:
            return True
    return False


def brute_embedding_count(pattern: LabeledGraph, host: LabeledGraph) -> int:
    """Distinct host node sets over all injective label/edge-preserving maps."""
    p = sorted(pattern.nodes)
    images = set()
    for combo in itertools.permutations(sorted(host.nodes), len(p)):
        m = dict(zip(p, combo))
        if any(pattern.label(x) != host.label(m[x]) for x in p):
            continue
        if all((m[s], m[t], lab) in host.edges for s, t, lab in pattern.edges):
            images.add(frozenset(combo))
    return len(images)


def connected_random_pattern(rng: random.Random, host: LabeledGraph, k: int) -> LabeledGraph | None:
    """A connected k-node subgraph of host with some edges dropped."""
    for _ in range(50):
        start = rng.choice(sorted(host.nodes))
        chosen = [start]
        while len(chosen) < k:
            frontier = sorted({n for c in chosen for n in host.neighbors(c)} - set(chosen))
            if not frontier:
                break
            chosen.append(rng.choice(frontier))
        if len(chosen) < k:
            continue
        sub = host.subgraph(chosen)
        edges = [e for e in sorted(sub.edges) if rng.random() < 0.8]
        g = LabeledGraph(sub.nodes, edges)
        if g.is_connected():
            return g
    return None
