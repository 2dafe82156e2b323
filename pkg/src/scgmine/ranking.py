"""Candidate ranking metrics and evaluation statistics."""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from scgmine.errors import BudgetExhausted, StatisticsError
from scgmine.graph import DEFAULT_BUDGET, LabeledGraph, has_embedding, is_isomorphic, wl_hash

K_VALUES = (3, 5, 10, None)  # None is MAP@inf, the whole list


class RankingMetric(str, Enum):
    PROBABILITY = "Probability"
    EDGES_SCALED = "EdgesScaled"
    FACTORIAL = "Factorial"
    COMPRESSION = "Compression"

    @classmethod
    def parse(cls, name: str) -> "RankingMetric":
        for m in cls:
            if m.value.lower() == name.lower() or m.name.lower() == name.lower():
                return m
        raise ValueError(f"unknown ranking metric {name!r}")


def _graph(item) -> LabeledGraph:
    return item if isinstance(item, LabeledGraph) else item.graph


def _text(item) -> str:
    if isinstance(item, LabeledGraph):
        from scgmine.edgelist import serialize

        return serialize(item) if item.num_edges else ""
    return item.text


class SupportIndex:
    """Isomorphism classes of an SCG database with their multiplicities.

    ``support(g)`` counts database components that contain ``g``.
    Repeated queries for the same graph are answered from a cache.
    """

    def __init__(self, scg_db, budget: int = DEFAULT_BUDGET):
        self.budget = budget
        self.classes: list[tuple[LabeledGraph, int]] = []
        buckets: dict[str, list[int]] = {}
        for g in scg_db:
            bucket = buckets.setdefault(wl_hash(g), [])
            for idx in bucket:
                rep, n = self.classes[idx]
                if is_isomorphic(rep, g):
                    self.classes[idx] = (rep, n + 1)
                    break
            else:
                bucket.append(len(self.classes))
                self.classes.append((g, 1))
        self._cache: dict[str, list] = {}

    def __len__(self):
        return sum(n for _, n in self.classes)

    def support(self, g: LabeledGraph) -> tuple[int, bool]:
        """``(support, exact)``; on budget exhaustion the count is a lower bound."""
        bucket = self._cache.setdefault(wl_hash(g), [])
        for rep, result in bucket:
            if is_isomorphic(rep, g):
                return result
        total, exact = 0, True
        for host, n in self.classes:
            if host.num_edges < g.num_edges or host.num_nodes < g.num_nodes:
                continue
            try:
                if has_embedding(g, host, self.budget):
                    total += n
            except BudgetExhausted:
                exact = False
        bucket.append((g, (total, exact)))
        return total, exact


def _support_index(scg_db) -> SupportIndex:
    if scg_db is None:
        raise ValueError("the Compression metric needs an SCG database")
    return scg_db if isinstance(scg_db, SupportIndex) else SupportIndex(scg_db)


def score_detail(candidate, metric: RankingMetric, scg_db=None) -> tuple[float, bool]:
    """``(score, exact)``; ``exact`` is False only for budget-limited Compression."""
    metric = RankingMetric(metric)
    if metric is RankingMetric.COMPRESSION:
        g = _graph(candidate)
        support, exact = _support_index(scg_db).support(g)
        return float((support - 1) * (g.num_nodes + g.num_edges - 1)), exact
    lp = candidate.logprob
    edges = _graph(candidate).num_edges
    if metric is RankingMetric.PROBABILITY:
        return lp, True
    if metric is RankingMetric.EDGES_SCALED:
        return (lp / edges if edges else lp), True
    return lp + math.lgamma(edges + 1), True


def score(candidate, metric: RankingMetric, scg_db=None) -> float:
    return score_detail(candidate, metric, scg_db)[0]


def rank(candidates, metric: RankingMetric, scg_db=None) -> list:
    """Descending score; ties broken by serialization text."""
    if RankingMetric(metric) is RankingMetric.COMPRESSION:
        scg_db = _support_index(scg_db)
    keyed = [(-score(c, metric, scg_db), _text(c), i, c) for i, c in enumerate(candidates)]
    keyed.sort(key=lambda t: (t[0], t[1]))
    return [t[3] for t in keyed]


def ap_at_k(ranked, relevant, k: int | None = None) -> float:
    """Average precision of the top ``k`` items (``None``: all of them).

    An item is relevant if it is isomorphic to a not yet matched member of
    ``relevant``; the sum is divided by ``len(relevant)``.
    """
    relevant = [_graph(r) for r in relevant]
    if not relevant:
        raise ValueError("relevant set is empty")
    if k is not None and k < 1:
        raise ValueError("k must be >= 1")
    top = list(ranked) if k is None else list(ranked)[:k]
    unmatched = list(range(len(relevant)))
    hits = 0
    total = 0.0
    for i, item in enumerate(top, start=1):
        g = _graph(item)
        for j in unmatched:
            if is_isomorphic(g, relevant[j]):
                unmatched.remove(j)
                hits += 1
                total += hits / i
                break
    return total / len(relevant)


def map_at_k(per_dataset, k: int | None = None) -> float:
    per_dataset = list(per_dataset)
    if not per_dataset:
        raise ValueError("no datasets")
    return math.fsum(ap_at_k(r, rel, k) for r, rel in per_dataset) / len(per_dataset)


def retrieved_count(candidates, relevant) -> int:
    """How many members of ``relevant`` are isomorphic to some candidate."""
    graphs = [_graph(c) for c in candidates]
    return sum(any(is_isomorphic(g, _graph(r)) for g in graphs) for r in relevant)


def _contains(host: LabeledGraph, pattern: LabeledGraph) -> bool:
    if pattern.num_edges > host.num_edges or pattern.num_nodes > host.num_nodes:
        return False
    return has_embedding(pattern, host)


def completion_score(candidate, truth) -> int:
    """3 isomorphic, 2 too large (contains truth), 1 too small, 0 otherwise."""
    c, t = _graph(candidate), _graph(truth)
    if is_isomorphic(c, t):
        return 3
    if _contains(c, t):
        return 2
    if _contains(t, c):
        return 1
    return 0


def average_ranks(values) -> np.ndarray:
    """1-based ranks with ties sharing their mean rank."""
    x = np.asarray(values, dtype=float)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x), dtype=float)
    sx = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _centered_ranks(values, name):
    r = average_ranks(values)
    r = r - r.mean()
    norm = math.sqrt(float(np.dot(r, r)))
    if norm == 0:
        raise StatisticsError(f"{name} has zero variance")
    return r / norm


def spearman(xs, ys) -> float:
    """Spearman's rho: Pearson correlation of tie-averaged ranks."""
    if len(xs) != len(ys):
        raise StatisticsError("series differ in length")
    if len(xs) < 2:
        raise StatisticsError("need at least two observations")
    rho = float(np.dot(_centered_ranks(xs, "xs"), _centered_ranks(ys, "ys")))
    return max(-1.0, min(1.0, rho))


def spearman_pvalue(xs, ys, resamples: int = 10_000, seed: int = 0) -> float:
    """Two-sided permutation p-value for Spearman's rho."""
    rho = spearman(xs, ys)
    rx = _centered_ranks(xs, "xs")
    ry = _centered_ranks(ys, "ys")
    rng = np.random.default_rng(seed)
    perms = rng.permuted(np.tile(ry, (resamples, 1)), axis=1)
    null = perms @ rx
    hits = int(np.count_nonzero(np.abs(null) >= abs(rho) - 1e-12))
    return (hits + 1) / (resamples + 1)


def safe_spearman(xs, ys) -> float | None:
    """Spearman's rho, or None where it is undefined."""
    try:
        return spearman(xs, ys)
    except StatisticsError:
        return None
