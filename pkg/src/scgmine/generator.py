"""Edge-wise generation of edit-pattern and completion candidates.

A candidate grows one EdgeList line at a time. Every line whose probability
under the backend reaches ``edge_prob_threshold`` is proposed; proposals
that break the EdgeList format or the metamodel are rejected and counted.
Candidates finish on a stop token, at ``max_edges``, or when no extension
survives the total-probability floor and the per-edge drop ratio.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property

from scgmine.diff import SimpleChangeGraph
from scgmine.edgelist import EdgeListDocument, header, parse_edge_line, serialize
from scgmine.errors import EdgeListError, MalformedLabelError
from scgmine.graph import LabeledGraph, is_isomorphic, wl_hash
from scgmine.lm.backend import top_tokens
from scgmine.lm.tokens import NEWLINE, STOP, detokenize, tokenize
from scgmine.metamodel import TypeGraph, simple_component_metamodel, validate_scg_typing

log = logging.getLogger(__name__)

LINE_FIELDS = 6
PATTERN_CONTEXT = ("e",)


@dataclass(frozen=True)
class GenerationParams:
    edge_prob_threshold: float = 0.05
    total_prob_floor: float = 1e-4
    drop_ratio: float = 0.1
    max_edges: int = 20
    max_frontier: int = 64
    pattern_header: bool = False  # prepend "t # 0" to the bare pattern context
    threshold_mode: str = "line"  # "line": cumulative line prob >= θ_e; "token": each token >= θ_e^(1/7)

    def __post_init__(self):
        if not 0 < self.edge_prob_threshold <= 1 or not 0 < self.total_prob_floor <= 1:
            raise ValueError("probability thresholds must lie in (0, 1]")
        if not 0 < self.drop_ratio < 1:
            raise ValueError("drop_ratio must lie in (0, 1)")
        if self.max_edges < 1 or self.max_frontier < 1:
            raise ValueError("max_edges and max_frontier must be positive")
        if self.threshold_mode not in ("line", "token"):
            raise ValueError("threshold_mode must be 'line' or 'token'")

    @classmethod
    def from_json(cls, doc: dict) -> "GenerationParams":
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown generation parameters: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class GenerationStats:
    """Tallies of rejected proposals, by gate."""

    proposals: int = 0
    syntax_rejections: int = 0
    metamodel_rejections: int = 0
    frontier_overflow: int = 0
    reasons: Counter = field(default_factory=Counter)

    def merge(self, other: "GenerationStats"):
        self.proposals += other.proposals
        self.syntax_rejections += other.syntax_rejections
        self.metamodel_rejections += other.metamodel_rejections
        self.frontier_overflow += other.frontier_overflow
        self.reasons.update(other.reasons)

    def to_json(self) -> dict:
        return {
            "proposals": self.proposals,
            "syntax_rejections": self.syntax_rejections,
            "metamodel_rejections": self.metamodel_rejections,
            "frontier_overflow": self.frontier_overflow,
            "reasons": dict(sorted(self.reasons.items())),
        }


@dataclass(frozen=True)
class Candidate:
    document: EdgeListDocument
    context: tuple  # tokens given to the backend before generation
    generated: tuple = ()
    token_logprobs: tuple = ()
    status: str = "incomplete"
    completion_reason: str | None = None
    num_context_edges: int = 0
    last_edge_logprob: float | None = None

    @cached_property
    def text(self) -> str:
        return self.document.text()

    @cached_property
    def graph(self) -> LabeledGraph:
        return self.document.to_graph()

    @property
    def num_edges(self) -> int:
        return self.document.num_edges

    @property
    def logprob(self) -> float:
        return math.fsum(self.token_logprobs)

    @property
    def probability(self) -> float:
        return math.exp(self.logprob)

    @property
    def tokens(self) -> tuple:
        return self.context + self.generated

    def finished(self, reason: str) -> "Candidate":
        return replace(self, status="complete", completion_reason=reason)

    def to_json(self) -> dict:
        return {
            "text": self.text,
            "status": self.status,
            "completion_reason": self.completion_reason,
            "generated": detokenize(self.generated),
            "token_logprobs": list(self.token_logprobs),
            "logprob": self.logprob,
            "num_edges": self.num_edges,
            "num_context_edges": self.num_context_edges,
        }


def _line_prefix(tokens: tuple) -> list:
    """Tokens of the unfinished last line (empty if the context ends a line)."""
    for i in range(len(tokens) - 1, -1, -1):
        if tokens[i] == NEWLINE:
            return list(tokens[i + 1:])
    return list(tokens)


def _enumerate_lines(backend, tokens: tuple, threshold: float, stats: GenerationStats, per_token: bool = False):
    """Return ``(prefix, lines)`` with every line of probability >= threshold.

    With ``per_token`` each token must instead reach ``threshold ** (1/7)``.

    ``line_tokens`` ends with NEWLINE, or is ``[STOP]`` for a stop proposal.
    Over-long or truncated lines are counted as syntax rejections.
    """
    prefix = _line_prefix(tokens)
    base = list(tokens)
    out = []
    token_cut = threshold ** (1.0 / (LINE_FIELDS + 1))

    def walk(line, logps, prob):
        cut = token_cut if per_token else threshold / prob
        for tok, p in top_tokens(backend, base + line, cut):
            if p <= 0:
                continue
            lp = math.log(p)
            fields = len(prefix) + len(line)
            if tok == STOP:
                if fields == 0:
                    out.append(([STOP], [lp]))
                else:
                    stats.proposals += 1
                    stats.syntax_rejections += 1
                    stats.reasons["truncated-line"] += 1
                continue
            if tok == NEWLINE:
                out.append((line + [tok], logps + [lp]))
                continue
            if fields >= LINE_FIELDS:
                stats.proposals += 1
                stats.syntax_rejections += 1
                stats.reasons["over-long-line"] += 1
                continue
            walk(line + [tok], logps + [lp], prob * p)

    walk([], [], 1.0)
    return prefix, out


def extend_one_edge(backend, candidate: Candidate, params: GenerationParams, tg: TypeGraph,
                    stats: GenerationStats | None = None) -> list[Candidate]:
    """Children of ``candidate``: one per admissible next line, plus a stop child."""
    stats = stats if stats is not None else GenerationStats()
    prefix, lines = _enumerate_lines(backend, candidate.tokens, params.edge_prob_threshold, stats,
                                     per_token=params.threshold_mode == "token")
    children = []
    dropped_by_ratio = False
    floor = math.log(params.total_prob_floor)
    for line, logps in lines:
        if line == [STOP]:
            children.append(replace(
                candidate,
                generated=candidate.generated + (STOP,),
                token_logprobs=candidate.token_logprobs + tuple(logps),
            ).finished("stop-token"))
            continue
        stats.proposals += 1
        text = " ".join(prefix + line[:-1])
        try:
            rec = parse_edge_line(text)
        except EdgeListError as err:
            stats.syntax_rejections += 1
            stats.reasons[err.kind] += 1
            log.debug("syntax rejection %r: %s", text, err)
            continue
        err = candidate.document.check(rec)
        if err is not None:
            stats.syntax_rejections += 1
            stats.reasons[err.kind] += 1
            log.debug("syntax rejection %r: %s", text, err)
            continue
        doc = candidate.document.extended(rec)
        try:
            violations = validate_scg_typing(doc.to_graph(), tg)
        except MalformedLabelError as exc:
            violations = [exc]
        if violations:
            stats.metamodel_rejections += 1
            stats.reasons["metamodel"] += 1
            log.debug("metamodel rejection %r: %s", text, violations[0])
            continue
        line_lp = math.fsum(logps)
        if candidate.logprob + line_lp < floor:
            continue
        if candidate.last_edge_logprob is not None and line_lp < math.log(params.drop_ratio) + candidate.last_edge_logprob:
            dropped_by_ratio = True
            continue
        child = replace(
            candidate,
            document=doc,
            generated=candidate.generated + tuple(line),
            token_logprobs=candidate.token_logprobs + tuple(logps),
            last_edge_logprob=line_lp,
        )
        if child.num_edges >= params.max_edges:
            child = child.finished("max-edges")
        children.append(child)
    if not children and candidate.num_edges:
        children.append(candidate.finished("prob-drop" if dropped_by_ratio else "threshold"))
    return children


def _order_key(c: Candidate):
    return (-c.logprob, c.text)


def deduplicate(candidates: list[Candidate]) -> list[Candidate]:
    """Drop isomorphic duplicates, keeping the most probable representative."""
    kept = []
    buckets: dict[str, list] = {}
    for c in sorted(candidates, key=_order_key):
        g = c.graph
        bucket = buckets.setdefault(wl_hash(g), [])
        if any(is_isomorphic(g, other) for other in bucket):
            continue
        bucket.append(g)
        kept.append(c)
    return kept


def _root(context) -> Candidate:
    tokens = tuple(tokenize(context)) if isinstance(context, str) else tuple(context)
    if tokens[:2] == ("t", "#"):
        text = detokenize(tokens)
        complete = text[: text.rfind("\n") + 1] if "\n" in text else ""
        doc = EdgeListDocument.from_text(complete)
    else:
        doc = EdgeListDocument(0)
    return Candidate(document=doc, context=tokens, num_context_edges=doc.num_edges)


def generate_candidates(backend, context, params: GenerationParams | None = None, tg: TypeGraph | None = None,
                        stats: GenerationStats | None = None) -> list[Candidate]:
    """Grow candidates from ``context`` until every one is complete.

    Returns complete, duplicate-free candidates ordered by probability then
    text.
    """
    params = params or GenerationParams()
    tg = tg or simple_component_metamodel()
    stats = stats if stats is not None else GenerationStats()
    root = _root(context)
    if root.num_edges >= params.max_edges:
        return [root.finished("max-edges")]
    frontier = [root]
    complete = []
    while frontier:
        grown = []
        for cand in frontier:
            for child in extend_one_edge(backend, cand, params, tg, stats):
                (complete if child.status == "complete" else grown).append(child)
        grown = deduplicate(grown)
        if len(grown) > params.max_frontier:
            stats.frontier_overflow += len(grown) - params.max_frontier
            log.info("frontier capped at %d (dropped %d)", params.max_frontier, len(grown) - params.max_frontier)
            grown = grown[: params.max_frontier]
        frontier = grown
    return deduplicate([c for c in complete if c.num_edges])


def generate_edit_patterns(backend, params: GenerationParams | None = None, tg: TypeGraph | None = None,
                           stats: GenerationStats | None = None) -> list[Candidate]:
    """Candidates grown from the bare ``e`` context, i.e. from nothing."""
    params = params or GenerationParams()
    context = PATTERN_CONTEXT
    if params.pattern_header:
        context = tuple(tokenize(header(0))) + PATTERN_CONTEXT
    return generate_candidates(backend, context, params, tg, stats)


def complete_scg(backend, partial: LabeledGraph, params: GenerationParams | None = None,
                 tg: TypeGraph | None = None, graph_id: int = 0,
                 stats: GenerationStats | None = None) -> list[tuple[Candidate, SimpleChangeGraph]]:
    """Completion candidates for an observed partial change graph."""
    context = serialize(partial, graph_id) if partial.num_edges else header(graph_id)
    out = []
    for cand in generate_candidates(backend, context, params, tg, stats):
        out.append((cand, SimpleChangeGraph.of(cand.graph)))
    return out
