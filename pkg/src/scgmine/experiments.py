"""Drivers for the four evaluation experiments and their reports."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from scgmine.corpus import Corpus, load_corpus
from scgmine.edgelist import parse
from scgmine.generator import GenerationParams, GenerationStats, generate_candidates, generate_edit_patterns
from scgmine.lm.backend import token_accuracy
from scgmine.lm.ngram import NGramModel
from scgmine.lm.samples import TrainingSample
from scgmine.lm.tokens import STOP
from scgmine.metamodel import TypeGraph, simple_component_metamodel
from scgmine.ranking import (
    K_VALUES,
    RankingMetric,
    SupportIndex,
    ap_at_k,
    completion_score,
    rank,
    retrieved_count,
    safe_spearman,
    score_detail,
    spearman_pvalue,
)
from scgmine.simulator import SimulationConfig, builtin_rules
from scgmine.errors import MissingArtifactError

MODEL_FILE = "model.json"


@dataclass
class Dataset:
    """One simulated repository with its corpus and trained backend."""

    name: str
    config: SimulationConfig
    corpus: Corpus
    backend: object
    base_model: int = 0  # index of the backend family, constant for the n-gram model

    @property
    def epochs(self) -> int:
        return getattr(self.backend, "epochs", 1)


def load_dataset(ds_dir) -> Dataset:
    root = Path(ds_dir)
    cfg_path = root / "repo" / "config.json"
    if not cfg_path.exists():
        raise MissingArtifactError(cfg_path)
    config = SimulationConfig.from_json(json.loads(cfg_path.read_text(encoding="utf-8")))
    corpus = load_corpus(root / "corpus")
    backend = NGramModel.load(root / "model" / MODEL_FILE)
    return Dataset(root.name, config, corpus, backend)


def k_label(k) -> str:
    return "inf" if k is None else str(k)


@dataclass
class ExperimentReport:
    experiment: int
    seed: int
    params: dict
    rows: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)
    correlations: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "params": self.params,
            "rows": self.rows,
            "aggregate": self.aggregate,
            "correlations": self.correlations,
        }

    def to_csv(self) -> str:
        scalar = lambda v: v is None or isinstance(v, (int, float, str, bool))
        cols = []
        for row in self.rows:
            for k, v in row.items():
                if scalar(v) and k not in cols:
                    cols.append(k)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in self.rows:
            w.writerow(["" if row.get(c) is None else _fmt(row.get(c)) for c in cols])
        return buf.getvalue()

    def write(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"experiment{self.experiment}"
        (out / f"{stem}.json").write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        (out / f"{stem}.csv").write_text(self.to_csv(), encoding="utf-8")


def _fmt(v):
    if isinstance(v, float):
        return repr(round(v, 12))
    return v


def _mean(xs):
    xs = list(xs)
    return math.fsum(xs) / len(xs) if xs else None


def _base_row(ds: Dataset) -> dict:
    return {
        "dataset": ds.name,
        "base_model": ds.base_model,
        "epochs": ds.epochs,
        "perturbation": ds.config.perturbation_prob,
        "revisions": ds.config.revisions,
        "ops_per_revision": ds.config.ops_per_revision,
        "train_tokens": ds.corpus.num_train_tokens,
    }


FACTORS = ("base_model", "epochs", "perturbation", "train_tokens")


def _correlate(rows, targets, factors=FACTORS, seed=0) -> dict:
    """Spearman rho and permutation p-value of each target against each factor.

    Cells are None where a series is constant and rho is undefined.
    """
    out = {}
    for t in targets:
        for f in factors:
            xs = [r[t] for r in rows]
            ys = [r[f] for r in rows]
            if len(rows) < 2 or any(v is None for v in xs):
                rho = None
            else:
                rho = safe_spearman(xs, ys)
            p = spearman_pvalue(xs, ys, seed=seed) if rho is not None else None
            out[f"{t}~{f}"] = {"rho": rho, "p": p}
    return out


# -- experiment 1: validity of generated output -------------------------------

def _exp1(ds: Dataset, params: GenerationParams, tg: TypeGraph) -> dict:
    stats = GenerationStats()
    cands = generate_edit_patterns(ds.backend, params, tg, stats)
    row = _base_row(ds)
    row.update({
        "proposals": stats.proposals,
        "invalid_graphs": stats.syntax_rejections,
        "invalid_scgs": stats.metamodel_rejections,
        "candidates": len(cands),
        "rejection_reasons": dict(sorted(stats.reasons.items())),
    })
    return row


# -- experiment 2: completion ----------------------------------------------------

def _completion_prompt(sample: TrainingSample, zero_omitted: bool):
    if zero_omitted:
        return tuple(t for t in sample.stream if t != STOP)
    return sample.prompt


def _exp2(ds: Dataset, params: GenerationParams, tg: TypeGraph, zero_omitted: bool = False) -> dict:
    samples = ds.corpus.test
    row = _base_row(ds)
    row["test_samples"] = len(samples)
    row["token_accuracy"] = token_accuracy(ds.backend, samples) if samples else None
    top_scores, best_scores, lengths, correct_ranks = [], [], [], []
    found = 0
    for s in samples:
        truth = parse(s.text)[1]
        cands = rank(generate_candidates(ds.backend, _completion_prompt(s, zero_omitted), params, tg),
                     RankingMetric.EDGES_SCALED)
        lengths.append(len(cands))
        scores = [completion_score(c.graph, truth) for c in cands]
        top_scores.append(scores[0] if scores else 0)
        best_scores.append(max(scores, default=0))
        if 3 in scores:
            found += 1
            correct_ranks.append(scores.index(3) + 1)
    n = len(samples)
    row.update({
        "correct_found": found / n if n else None,
        "mean_candidates": _mean(lengths),
        "mean_correct_rank": _mean(correct_ranks),
        "mean_top_ranked_score": _mean(top_scores),
        "mean_best_score": _mean(best_scores),
        "top_ranked_scores": top_scores,
        "best_scores": best_scores,
    })
    return row


# -- experiment 3: edit-pattern retrieval --------------------------------------

def _exp3(ds: Dataset, params: GenerationParams, tg: TypeGraph) -> dict:
    rules = builtin_rules()
    cands = generate_edit_patterns(ds.backend, params, tg)
    row = _base_row(ds)
    row["candidates"] = len(cands)
    row["retrieved"] = retrieved_count(cands, [r.pattern for r in rules])
    row["retrieved_rules"] = [r.name for r in rules if retrieved_count(cands, [r.pattern])]
    return row


# -- experiment 4: ranking comparison --------------------------------------------

def _exp4(ds: Dataset, params: GenerationParams, tg: TypeGraph) -> dict:
    relevant = [r.pattern for r in builtin_rules()]
    cands = generate_edit_patterns(ds.backend, params, tg)
    index = SupportIndex(ds.corpus.components)
    row = _base_row(ds)
    row["candidates"] = len(cands)
    exact = True
    for metric in RankingMetric:
        ranked = rank(cands, metric, index)
        if metric is RankingMetric.COMPRESSION:
            exact = all(score_detail(c, metric, index)[1] for c in cands)
        for k in K_VALUES:
            row[f"ap_{metric.value}@{k_label(k)}"] = ap_at_k(ranked, relevant, k)
    row["compression_exact"] = exact
    return row


_DRIVERS = {1: _exp1, 2: _exp2, 3: _exp3, 4: _exp4}


def _run_one(args):
    n, ds, params, tg, extra = args
    if isinstance(ds, (str, Path)):
        ds = load_dataset(ds)
    return _DRIVERS[n](ds, params, tg, **extra)


def run_experiment(n: int, datasets, params: GenerationParams | None = None, tg: TypeGraph | None = None,
                   seed: int = 0, jobs: int = 1, zero_omitted: bool = False) -> ExperimentReport:
    """Run experiment ``n`` (1-4) on ``datasets`` (Dataset objects or directories)."""
    if n not in _DRIVERS:
        raise ValueError(f"experiment must be 1..4, got {n}")
    params = params or GenerationParams()
    tg = tg or simple_component_metamodel()
    extra = {"zero_omitted": zero_omitted} if n == 2 else {}
    tasks = [(n, ds, params, tg, extra) for ds in datasets]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_one, tasks))
    else:
        rows = [_run_one(t) for t in tasks]
    report = ExperimentReport(n, seed, {**asdict(params), **({"zero_omitted": zero_omitted} if n == 2 else {})}, rows)
    _summarize(report, seed)
    return report


def _summarize(report: ExperimentReport, seed: int):
    rows = report.rows
    n = report.experiment
    if not rows:
        return
    if n == 1:
        report.aggregate = {
            "invalid_graphs": sum(r["invalid_graphs"] for r in rows),
            "invalid_scgs": sum(r["invalid_scgs"] for r in rows),
            "proposals": sum(r["proposals"] for r in rows),
        }
        report.correlations = _correlate(rows, ("invalid_graphs", "invalid_scgs"), seed=seed)
    elif n == 2:
        keys = ("token_accuracy", "correct_found", "mean_candidates", "mean_correct_rank",
                "mean_top_ranked_score", "mean_best_score")
        report.aggregate = {k: _mean(r[k] for r in rows if r[k] is not None) for k in keys}
        report.correlations = _correlate(rows, ("token_accuracy", "mean_top_ranked_score", "mean_best_score"), seed=seed)
    elif n == 3:
        report.aggregate = {"mean_retrieved": _mean(r["retrieved"] for r in rows)}
        report.correlations = _correlate(rows, ("retrieved",), FACTORS + ("revisions", "ops_per_revision"), seed=seed)
    else:
        table = {}
        for metric in RankingMetric:
            table[metric.value] = {
                k_label(k): _mean(r[f"ap_{metric.value}@{k_label(k)}"] for r in rows) for k in K_VALUES
            }
        report.aggregate = {"map": table}
        metrics = list(RankingMetric)
        corr = {}
        for i, a in enumerate(metrics):
            for b in metrics[i + 1:]:
                xs = [r[f"ap_{a.value}@inf"] for r in rows]
                ys = [r[f"ap_{b.value}@inf"] for r in rows]
                rho = safe_spearman(xs, ys) if len(rows) >= 2 else None
                corr[f"{a.value}~{b.value}"] = {
                    "rho": rho,
                    "p": spearman_pvalue(xs, ys, seed=seed) if rho is not None else None,
                }
        report.correlations = corr

