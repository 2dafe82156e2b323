"""Directed labeled graphs and the structural queries built on them.

Every model, difference graph and simple change graph in the package is a
:class:`LabeledGraph`. Graphs are immutable once built; derived structures
(adjacency, matching encodings) are cached on the instance.
"""

from __future__ import annotations

import os
from collections import Counter
from hashlib import blake2b
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from scgmine.errors import BudgetExhausted, GraphError

try:
    if os.environ.get("SCGMINE_PURE_PYTHON"):
        raise ImportError("pure python requested")
    from scgmine import _match as _kernel
except ImportError:
    from scgmine import _match_py as _kernel

from scgmine import _match_py

KERNEL_BACKEND = _kernel.BACKEND
DEFAULT_WL_ITERATIONS = 3
DEFAULT_BUDGET = 2_000_000

Edge = tuple  # (src, tgt, label)


class LabeledGraph:
    """Directed graph with string-labeled nodes and edges (set semantics)."""

    __slots__ = ("_nodes", "_edges", "_out", "_in", "_cache")

    def __init__(self, nodes: Mapping[int, str] | None = None, edges: Iterable[Edge] = ()):
        node_map = dict(nodes or {})
        for nid, label in node_map.items():
            if not isinstance(nid, int) or isinstance(nid, bool) or nid < 0:
                raise GraphError(f"node id must be a non-negative integer, got {nid!r}")
            if not isinstance(label, str) or not label:
                raise GraphError(f"node {nid} has an empty or non-string label")
        edge_list = [tuple(e) for e in edges]
        edge_set = frozenset(edge_list)
        if len(edge_set) != len(edge_list):
            dup = next(e for e, c in Counter(edge_list).items() if c > 1)
            raise GraphError(f"duplicate edge {dup}")
        for src, tgt, label in edge_set:
            if src not in node_map or tgt not in node_map:
                raise GraphError(f"edge ({src}, {tgt}, {label}) has an unknown endpoint")
            if not isinstance(label, str) or not label:
                raise GraphError(f"edge ({src}, {tgt}) has an empty label")
        self._nodes = node_map
        self._edges = edge_set
        self._out = None
        self._in = None
        self._cache = {}

    @property
    def nodes(self) -> Mapping[int, str]:
        return MappingProxyType(self._nodes)

    @property
    def edges(self) -> frozenset:
        return self._edges

    @property
    def num_nodes(self) -> int:
        return len(self._nodes)

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    def __len__(self):
        return len(self._nodes)

    def __bool__(self):
        return bool(self._nodes)

    def __contains__(self, nid):
        return nid in self._nodes

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._nodes))

    def __eq__(self, other):
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    def __hash__(self):
        return hash((frozenset(self._nodes.items()), self._edges))

    def __repr__(self):
        return f"LabeledGraph(nodes={len(self._nodes)}, edges={len(self._edges)})"

    def label(self, nid: int) -> str:
        return self._nodes[nid]

    def _build_adjacency(self):
        out = {n: [] for n in self._nodes}
        inc = {n: [] for n in self._nodes}
        for src, tgt, label in sorted(self._edges):
            out[src].append((tgt, label))
            inc[tgt].append((src, label))
        self._out = {n: tuple(v) for n, v in out.items()}
        self._in = {n: tuple(v) for n, v in inc.items()}

    def out_edges(self, nid: int) -> tuple:
        """``(target, label)`` pairs leaving ``nid``, sorted."""
        if self._out is None:
            self._build_adjacency()
        return self._out[nid]

    def in_edges(self, nid: int) -> tuple:
        """``(source, label)`` pairs entering ``nid``, sorted."""
        if self._in is None:
            self._build_adjacency()
        return self._in[nid]

    def neighbors(self, nid: int) -> set:
        return {t for t, _ in self.out_edges(nid)} | {s for s, _ in self.in_edges(nid)}

    def degree(self, nid: int) -> int:
        return len(self.out_edges(nid)) + len(self.in_edges(nid))

    def incident_edges(self, nid: int) -> list:
        return [(nid, t, l) for t, l in self.out_edges(nid)] + [(s, nid, l) for s, l in self.in_edges(nid)]

    def node_label_counts(self) -> Counter:
        return Counter(self._nodes.values())

    def edge_label_counts(self) -> Counter:
        return Counter(l for _, _, l in self._edges)

    def relabel(self, mapping: Mapping[int, int]) -> "LabeledGraph":
        """Rename node ids; ``mapping`` must be injective over the node set."""
        nodes = {mapping[n]: l for n, l in self._nodes.items()}
        if len(nodes) != len(self._nodes):
            raise GraphError("relabel mapping is not injective")
        return LabeledGraph(nodes, [(mapping[s], mapping[t], l) for s, t, l in self._edges])

    def map_labels(self, node_fn=None, edge_fn=None) -> "LabeledGraph":
        node_fn = node_fn or (lambda x: x)
        edge_fn = edge_fn or (lambda x: x)
        return LabeledGraph(
            {n: node_fn(l) for n, l in self._nodes.items()},
            [(s, t, edge_fn(l)) for s, t, l in self._edges],
        )

    def subgraph(self, node_ids: Iterable[int]) -> "LabeledGraph":
        keep = set(node_ids)
        return LabeledGraph(
            {n: l for n, l in self._nodes.items() if n in keep},
            [e for e in self._edges if e[0] in keep and e[1] in keep],
        )

    def union(self, other: "LabeledGraph") -> "LabeledGraph":
        nodes = dict(self._nodes)
        for n, l in other._nodes.items():
            if nodes.setdefault(n, l) != l:
                raise GraphError(f"node {n} labeled differently in union operands")
        return LabeledGraph(nodes, self._edges | other._edges)

    def is_connected(self) -> bool:
        return len(connected_components(self)) <= 1


def connected_components(g: LabeledGraph) -> list[LabeledGraph]:
    """Weakly connected components, ordered by their smallest node id."""
    seen = set()
    parts = []
    for start in sorted(g.nodes):
        if start in seen:
            continue
        seen.add(start)
        stack = [start]
        members = []
        while stack:
            n = stack.pop()
            members.append(n)
            for m in g.neighbors(n):
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        parts.append(g.subgraph(members))
    return parts


def _digest(text: str, size: int = 16) -> str:
    return blake2b(text.encode("utf-8"), digest_size=size).hexdigest()


def wl_hash(g: LabeledGraph, iterations: int = DEFAULT_WL_ITERATIONS) -> str:
    """Weisfeiler-Lehman digest over labels, edge labels and edge direction.

    Equal for isomorphic graphs. Each round re-colors a node from its own
    color plus the sorted multiset of ``(direction, edge label, neighbor
    color)`` triples; the result digests the color histograms of all rounds.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    key = ("wl", iterations)
    cached = g._cache.get(key)
    if cached is not None:
        return cached
    colors = {n: _digest(l) for n, l in g.nodes.items()}
    rounds = [sorted(colors.values())]
    for _ in range(iterations):
        new = {}
        for n in g.nodes:
            neigh = [f">{l}:{colors[t]}" for t, l in g.out_edges(n)]
            neigh += [f"<{l}:{colors[s]}" for s, l in g.in_edges(n)]
            neigh.sort()
            new[n] = _digest(colors[n] + "|" + ";".join(neigh))
        colors = new
        rounds.append(sorted(colors.values()))
    summary = f"{g.num_nodes},{g.num_edges}#" + "/".join(",".join(r) for r in rounds)
    value = _digest(summary)
    g._cache[key] = value
    return value


# -- subgraph matching ----------------------------------------------------

_EDGE_CODES: dict[str, int] = {}
_NODE_CODES: dict[str, int] = {}


def _code(table, label):
    code = table.get(label)
    if code is None:
        code = table[label] = len(table)
    return code


class _Host:
    """Matching-side encoding of a graph, cached per graph instance."""

    def __init__(self, g: LabeledGraph):
        ids = sorted(g.nodes)
        index = {n: i for i, n in enumerate(ids)}
        n = len(ids)
        self.ids = ids
        self.index = index
        self.labels = [_code(_NODE_CODES, g.label(x)) for x in ids]
        adj = [0] * (n * n)
        outdeg = [0] * n
        indeg = [0] * n
        for s, t, l in g.edges:
            i, j = index[s], index[t]
            adj[i * n + j] |= 1 << _code(_EDGE_CODES, l)
            outdeg[i] += 1
            indeg[j] += 1
        self.adj = adj
        self.outdeg = outdeg
        self.indeg = indeg
        degree = [outdeg[i] + indeg[i] for i in range(n)]
        sort_key = lambda i: (g.label(ids[i]), degree[i], ids[i])
        self.order = sorted(range(n), key=sort_key)
        indptr = [0]
        indices = []
        for x in ids:
            nb = sorted((index[m] for m in g.neighbors(x) if m != x), key=sort_key)
            indices.extend(nb)
            indptr.append(len(indices))
        self.indptr = indptr
        self.indices = indices
        self.label_freq = Counter(self.labels)
        self._packed = None

    def packed(self):
        if self._packed is None:
            import numpy as np

            self._packed = (
                np.asarray(self.labels, dtype=np.int64),
                np.asarray(self.adj, dtype=np.uint64),
                np.asarray(self.outdeg, dtype=np.int64),
                np.asarray(self.indeg, dtype=np.int64),
                np.asarray(self.indptr, dtype=np.int64),
                np.asarray(self.indices, dtype=np.int64),
                np.asarray(self.order, dtype=np.int64),
            )
        return self._packed


def _host(g: LabeledGraph) -> _Host:
    enc = g._cache.get("host")
    if enc is None:
        enc = g._cache["host"] = _Host(g)
    return enc


def _pattern_plan(p: LabeledGraph, host: _Host):
    """Matching order and anchors for pattern ``p`` against ``host``."""
    enc = _host(p)
    n = len(enc.ids)
    degree = [enc.outdeg[i] + enc.indeg[i] for i in range(n)]
    neigh = [set(enc.indices[enc.indptr[i]:enc.indptr[i + 1]]) for i in range(n)]
    rarity = [host.label_freq.get(enc.labels[i], 0) for i in range(n)]
    labels = [p.label(x) for x in enc.ids]
    placed = []
    pos = {}
    remaining = set(range(n))
    while remaining:
        frontier = [i for i in remaining if neigh[i] & pos.keys()]
        pool = frontier or list(remaining)
        best = min(pool, key=lambda i: (-len(neigh[i] & pos.keys()), rarity[i], -degree[i], labels[i], enc.ids[i]))
        pos[best] = len(placed)
        placed.append(best)
        remaining.discard(best)
    anchor = []
    for i in placed:
        earlier = [j for j in neigh[i] if j in pos and pos[j] < pos[i]]
        anchor.append(min(earlier, key=pos.__getitem__) if earlier else -1)
    return enc, placed, anchor


def _run_match(pattern: LabeledGraph, host: LabeledGraph, limit: int, budget: int, kernel=None):
    if pattern.num_nodes == 0:
        return 1, False
    if pattern.num_nodes > host.num_nodes or pattern.num_edges > host.num_edges:
        return 0, False
    hl = host.node_label_counts()
    for label, c in pattern.node_label_counts().items():
        if hl.get(label, 0) < c:
            return 0, False
    he = host.edge_label_counts()
    for label, c in pattern.edge_label_counts().items():
        if he.get(label, 0) < c:
            return 0, False
    h = _host(host)
    p, order, anchor = _pattern_plan(pattern, h)
    kernel = kernel or _kernel
    if kernel is not _match_py and max(_EDGE_CODES.values(), default=0) >= 64:
        kernel = _match_py
    if kernel is _match_py:
        return _match_py.match(
            p.labels, p.adj, order, anchor, p.outdeg, p.indeg,
            h.labels, h.adj, h.outdeg, h.indeg, h.indptr, h.indices, h.order,
            limit, budget,
        )
    pl, padj, pod, pid, *_ = p.packed()
    return kernel.match(pl, padj, order, anchor, pod, pid, *h.packed(), limit, budget)


def is_isomorphic(g1: LabeledGraph, g2: LabeledGraph, kernel=None) -> bool:
    """Exact label-preserving isomorphism test with a WL-hash prefilter."""
    if g1.num_nodes != g2.num_nodes or g1.num_edges != g2.num_edges:
        return False
    if g1.node_label_counts() != g2.node_label_counts():
        return False
    if g1.edge_label_counts() != g2.edge_label_counts():
        return False
    if wl_hash(g1) != wl_hash(g2):
        return False
    # an injective edge-preserving map between equal-sized graphs is a bijection
    count, _ = _run_match(g1, g2, limit=1, budget=0, kernel=kernel)
    return count > 0


def count_embeddings(pattern: LabeledGraph, host: LabeledGraph, budget: int = DEFAULT_BUDGET, kernel=None) -> int:
    """Number of distinct host node sets carrying a copy of ``pattern``.

    Raises :class:`BudgetExhausted` with the partial count when more than
    ``budget`` candidate assignments are needed (``budget=0`` disables it).
    """
    if pattern.num_nodes and not pattern.is_connected():
        raise GraphError("pattern must be connected")
    count, exhausted = _run_match(pattern, host, limit=0, budget=budget, kernel=kernel)
    if exhausted:
        raise BudgetExhausted(count, budget)
    return count


def has_embedding(pattern: LabeledGraph, host: LabeledGraph, budget: int = DEFAULT_BUDGET, kernel=None) -> bool:
    """Whether ``pattern`` is a (not necessarily induced) subgraph of ``host``."""
    count, exhausted = _run_match(pattern, host, limit=1, budget=budget, kernel=kernel)
    if exhausted and not count:
        raise BudgetExhausted(count, budget)
    return count > 0
