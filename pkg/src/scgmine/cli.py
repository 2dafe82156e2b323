"""Command-line entry point: ``scgmine <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from functools import cached_property
from pathlib import Path

from scgmine import __version__
from scgmine.config import generation_params, load_config
from scgmine.corpus import build_corpus, load_corpus, write_corpus
from scgmine.edgelist import parse
from scgmine.errors import ConfigError, MissingArtifactError, ScgMineError
from scgmine.experiments import MODEL_FILE, load_dataset, run_experiment
from scgmine.generator import GenerationParams, GenerationStats, complete_scg, generate_edit_patterns
from scgmine.lm.ngram import NGramModel, train_ngram
from scgmine.manifest import MANIFEST, staged_output, write_manifest
from scgmine.ranking import RankingMetric, SupportIndex, rank, score_detail
from scgmine.simulator import SimulationConfig, derive_seed, load_repository, simulate_repository, write_repository

log = logging.getLogger("scgmine")


class StageError(Exception):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


# -- building blocks shared by the subcommands and the pipeline --------------------

def grid_configs(cfg: dict) -> list[SimulationConfig]:
    sim = cfg["simulator"]
    seed = cfg["seed"]
    return [
        SimulationConfig(d, e, p, derive_seed(seed, "grid", e, d, p))
        for e in sim["ops_per_revision"]
        for d in sim["revisions"]
        for p in sim["perturbation"]
    ]


def do_simulate(sim_cfg: SimulationConfig, out: Path, cfg: dict):
    models, ops = simulate_repository(sim_cfg)
    write_repository(out, models, ops, sim_cfg)
    write_manifest(out, "simulate", cfg, sim_cfg.seed, extra={"dataset": sim_cfg.name})


def do_prepare(repo: Path, out: Path, cfg: dict):
    models = load_repository(repo)[0]
    corpus = build_corpus(models, seed=cfg["seed"], test_fraction=cfg["corpus"]["test_fraction"],
                          extra_orderings=cfg["corpus"]["extra_orderings"])
    write_corpus(out, corpus)
    write_manifest(out, "prepare", cfg, cfg["seed"], inputs=[repo], extra={
        "pairs": len(corpus.pair_scgs),
        "components": len(corpus.components),
        "train_samples": len(corpus.train),
        "test_samples": len(corpus.test),
    })


def do_train(corpus_dir: Path, out: Path, cfg: dict):
    corpus = load_corpus(corpus_dir)
    lm = cfg["lm"]
    model = train_ngram(corpus.train, lm["order"], lm["alpha"], lm["epochs"])
    out.mkdir(parents=True, exist_ok=True)
    model.save(out / MODEL_FILE)
    write_manifest(out, "train", cfg, cfg["seed"], inputs=[corpus_dir], extra={
        "backend": "ngram",
        "train_tokens": corpus.num_train_tokens,
    })


def build_dataset(args):
    """Simulate, prepare and train one dataset below ``ds_dir``."""
    sim_cfg, ds_dir, cfg = args
    stage = "simulate"
    try:
        do_simulate(sim_cfg, ds_dir / "repo", cfg)
        stage = "prepare"
        do_prepare(ds_dir / "repo", ds_dir / "corpus", cfg)
        stage = "train"
        do_train(ds_dir / "corpus", ds_dir / "model", cfg)
    except Exception as exc:
        raise StageError(f"{stage} ({sim_cfg.name})", exc) from exc
    return sim_cfg.name


def _load_backend(path) -> NGramModel:
    p = Path(path)
    return NGramModel.load(p / MODEL_FILE if p.is_dir() else p)


def _write_candidates(out: Path, cands, stats: GenerationStats | None, cfg, command, inputs, params):
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, c in enumerate(cands):
        name = f"cand_{i:04d}.el"
        (out / name).write_text(c.text, encoding="utf-8")
        entries.append({"file": name, **c.to_json()})
    extra = {"candidates": entries, "params": asdict(params) if params else None}
    if stats is not None:
        extra["rejections"] = stats.to_json()
    write_manifest(out, command, cfg, cfg["seed"], inputs=inputs, extra=extra)


class StoredCandidate:
    """A candidate read back from a candidates directory."""

    def __init__(self, text: str, logprob: float, file: str):
        self.text = text
        self.logprob = logprob
        self.file = file

    @cached_property
    def graph(self):
        return parse(self.text)[1]


def read_candidates(cand_dir) -> list[StoredCandidate]:
    root = Path(cand_dir)
    mf = root / MANIFEST
    if not mf.exists():
        raise MissingArtifactError(mf)
    doc = json.loads(mf.read_text(encoding="utf-8"))
    out = []
    for entry in doc.get("candidates", []):
        path = root / entry["file"]
        if not path.exists():
            raise MissingArtifactError(path)
        out.append(StoredCandidate(path.read_text(encoding="utf-8"), math.fsum(entry["token_logprobs"]), entry["file"]))
    return out


def dataset_dirs(data_dir) -> list[Path]:
    root = Path(data_dir)
    dirs = sorted(p for p in root.iterdir() if p.is_dir() and (p / "model").is_dir()) if root.is_dir() else []
    if not dirs:
        raise MissingArtifactError(root / "<dataset>" / "model" / MODEL_FILE)
    return dirs


def do_evaluate(experiments, data_dirs, out: Path, cfg: dict, jobs: int):
    params = generation_params(cfg)
    reports = {}
    for n in experiments:
        report = run_experiment(n, data_dirs, params, seed=cfg["seed"], jobs=jobs,
                                zero_omitted=cfg["experiments"]["zero_omitted"])
        report.write(out)
        reports[n] = report
    return reports


# -- subcommands -------------------------------------------------------------------

def cmd_simulate(a, cfg):
    configs = grid_configs(cfg)
    with staged_output(a.out) as tmp:
        if a.grid:
            for sc in configs:
                do_simulate(sc, tmp / sc.name / "repo", cfg)
            inputs = [tmp / sc.name / "repo" for sc in configs]
            write_manifest(tmp, "simulate --grid", cfg, cfg["seed"], inputs=inputs,
                           extra={"datasets": [sc.name for sc in configs]})
        else:
            if len(configs) != 1:
                raise ConfigError(f"{len(configs)} simulator configurations selected; use --grid or pick one")
            do_simulate(configs[0], tmp, cfg)


def cmd_prepare(a, cfg):
    with staged_output(a.out) as tmp:
        do_prepare(Path(a.repo), tmp, cfg)


def cmd_train(a, cfg):
    with staged_output(a.out) as tmp:
        do_train(Path(a.corpus), tmp, cfg)


def _params(a, cfg) -> GenerationParams:
    if getattr(a, "params", None):
        p = Path(a.params)
        if not p.exists():
            raise ConfigError(f"params file {p} does not exist")
        try:
            return GenerationParams.from_json(json.loads(p.read_text(encoding="utf-8")))
        except (TypeError, ValueError) as err:
            raise ConfigError(f"bad generation parameters in {p}: {err}") from err
    return generation_params(cfg)


def cmd_generate_patterns(a, cfg):
    params = _params(a, cfg)
    backend = _load_backend(a.model)
    stats = GenerationStats()
    cands = generate_edit_patterns(backend, params, stats=stats)
    with staged_output(a.out) as tmp:
        _write_candidates(tmp, cands, stats, cfg, "generate-patterns", [Path(a.model)], params)


def cmd_complete(a, cfg):
    params = _params(a, cfg)
    backend = _load_backend(a.model)
    ctx = Path(a.context)
    if not ctx.exists():
        raise MissingArtifactError(ctx)
    gid, partial = parse(ctx.read_text(encoding="utf-8"))
    stats = GenerationStats()
    cands = [c for c, _ in complete_scg(backend, partial, params, graph_id=gid, stats=stats)]
    with staged_output(a.out) as tmp:
        _write_candidates(tmp, cands, stats, cfg, "complete", [Path(a.model)], params)


def cmd_rank(a, cfg):
    metric = RankingMetric.parse(a.metric)
    cands = read_candidates(a.candidates)
    db = None
    if metric is RankingMetric.COMPRESSION:
        if not a.scg_db:
            raise ConfigError("--scg-db CORPUS_DIR is required for the Compression metric")
        db = SupportIndex(load_corpus(a.scg_db).components)
    ranked = rank(cands, metric, db)
    rows = []
    for i, c in enumerate(ranked, start=1):
        value, exact = score_detail(c, metric, db)
        rows.append({"rank": i, "file": c.file, "score": value, "exact": exact})
    inputs = [Path(a.candidates)] + ([Path(a.scg_db)] if a.scg_db else [])
    with staged_output(a.out) as tmp:
        (tmp / "ranking.json").write_text(json.dumps({"metric": metric.value, "ranking": rows}, indent=2) + "\n",
                                          encoding="utf-8")
        write_manifest(tmp, f"rank --metric {metric.value}", cfg, cfg["seed"], inputs=inputs)


def cmd_evaluate(a, cfg):
    dirs = dataset_dirs(a.data)
    with staged_output(a.out) as tmp:
        do_evaluate(a.experiment, dirs, tmp, cfg, a.jobs)
        write_manifest(tmp, "evaluate " + " ".join(f"--experiment {n}" for n in a.experiment), cfg, cfg["seed"],
                       inputs=[d / "model" for d in dirs])


def cmd_pipeline(a, cfg):
    configs = grid_configs(cfg)
    with staged_output(a.out) as tmp:
        data = tmp / "datasets"
        tasks = [(sc, data / sc.name, cfg) for sc in configs]
        if a.jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=a.jobs) as pool:
                names = list(pool.map(build_dataset, tasks))
        else:
            names = [build_dataset(t) for t in tasks]
        log.info("built %d datasets", len(names))
        dirs = [data / n for n in names]
        report = tmp / "report"
        try:
            reports = do_evaluate(cfg["experiments"]["run"], dirs, report, cfg, a.jobs)
        except Exception as exc:
            raise StageError("evaluate", exc) from exc
        write_manifest(report, "evaluate", cfg, cfg["seed"], inputs=[d / "model" for d in dirs])
        write_manifest(tmp, "pipeline", cfg, cfg["seed"], inputs=[report], extra={
            "datasets": names,
            "config": cfg,
            "summary": {str(n): r.aggregate for n, r in reports.items()},
        })


# -- argument parsing --------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes (default: logical cores)")
    p.add_argument("--config", help="TOML or JSON run configuration")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="scgmine", description=__doc__)
    parser.add_argument("--version", action="version", version=f"scgmine {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="simulate synthetic model repositories")
    p.add_argument("--out", required=True, help="repository directory (or grid root with --grid)")
    p.add_argument("--grid", action="store_true", help="write every selected configuration to OUT/<name>/repo")
    p.add_argument("--revisions", "--d", dest="revisions", type=int, nargs="+", help="revision counts d")
    p.add_argument("--ops", "--e", dest="ops", type=int, nargs="+", help="edit operations per revision e")
    p.add_argument("--perturbation", "--p", dest="perturbation", type=float, nargs="+", help="perturbation probabilities p")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("prepare", parents=[common], help="derive SCGs and training samples from a repository")
    p.add_argument("--repo", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", parents=[common], help="train the n-gram backend on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--order", type=int)
    p.add_argument("--alpha", type=float)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate-patterns", parents=[common], help="generate edit-pattern candidates")
    p.add_argument("--model", required=True, help="model directory or model file")
    p.add_argument("--params", help="JSON file of generation parameters")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate_patterns)

    p = sub.add_parser("complete", parents=[common], help="complete a partial change graph")
    p.add_argument("--model", required=True)
    p.add_argument("--context", required=True, help="EdgeList file holding the partial graph")
    p.add_argument("--params", help="JSON file of generation parameters")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("rank", parents=[common], help="rank a candidates directory")
    p.add_argument("--candidates", required=True)
    p.add_argument("--metric", default="EdgesScaled", help="Probability, EdgesScaled, Factorial or Compression")
    p.add_argument("--scg-db", help="corpus directory whose components form the Compression database")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("evaluate", parents=[common], help="run experiments over prepared datasets")
    p.add_argument("--experiment", type=int, action="append", required=True, choices=(1, 2, 3, 4))
    p.add_argument("--data", required=True, help="directory of <dataset>/{repo,corpus,model}")
    p.add_argument("--zero-omitted", action="store_true", help="complete full serializations (nothing omitted)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", parents=[common], help="simulate, prepare, train and evaluate end to end")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pipeline)
    return parser


def _overrides(a) -> dict:
    out: dict = {}
    if a.seed is not None:
        out["seed"] = a.seed
    sim = {k: v for k, v in (("revisions", getattr(a, "revisions", None)),
                             ("ops_per_revision", getattr(a, "ops", None)),
                             ("perturbation", getattr(a, "perturbation", None))) if v}
    if sim:
        out["simulator"] = sim
    lm = {k: v for k, v in (("order", getattr(a, "order", None)), ("alpha", getattr(a, "alpha", None)))
          if v is not None}
    if lm:
        out["lm"] = lm
    if getattr(a, "zero_omitted", False):
        out["experiments"] = {"zero_omitted": True}
    return out


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=(logging.WARNING, logging.INFO, logging.DEBUG)[min(a.verbose, 2)],
                        format="%(levelname)s %(name)s: %(message)s")
    if a.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        cfg = load_config(a.config, _overrides(a))
        a.func(a, cfg)
    except ConfigError as err:
        print(f"scgmine: config error: {err}", file=sys.stderr)
        return 2
    except StageError as err:
        print(f"scgmine {a.command}: {err}", file=sys.stderr)
        return 1
    except (ScgMineError, OSError, ValueError) as err:
        print(f"scgmine {a.command}: error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
