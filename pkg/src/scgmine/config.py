"""Run configuration: one TOML or JSON file with a section per module."""

from __future__ import annotations

import copy
import json
from dataclasses import fields
from pathlib import Path

from scgmine.errors import ConfigError
from scgmine.generator import GenerationParams
from scgmine.simulator import GRID_D, GRID_E, GRID_P

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

DEFAULTS = {
    "seed": 0,
    "simulator": {
        "revisions": list(GRID_D),
        "ops_per_revision": list(GRID_E),
        "perturbation": list(GRID_P),
    },
    "corpus": {"test_fraction": 0.1, "extra_orderings": 0},
    "lm": {"order": 5, "alpha": 0.4, "epochs": 1},
    "generator": {f.name: f.default for f in fields(GenerationParams)},
    "experiments": {"run": [1, 2, 3, 4], "zero_omitted": False},
}


def _merge(base: dict, override: dict, path: str = ""):
    for key, value in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config field {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config field {where!r} must be a table")
            _merge(base[key], value, where + ".")
        else:
            base[key] = value


def _as_list(value, name, kind):
    items = value if isinstance(value, list) else [value]
    try:
        return [kind(v) for v in items]
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{name}: {err}") from err


def validate(cfg: dict) -> dict:
    """Check ranges and types; returns the normalized config."""
    sim = cfg["simulator"]
    sim["revisions"] = _as_list(sim["revisions"], "simulator.revisions", int)
    sim["ops_per_revision"] = _as_list(sim["ops_per_revision"], "simulator.ops_per_revision", int)
    sim["perturbation"] = _as_list(sim["perturbation"], "simulator.perturbation", float)
    if any(d < 1 for d in sim["revisions"]) or any(e < 1 for e in sim["ops_per_revision"]):
        raise ConfigError("simulator.revisions and simulator.ops_per_revision must be >= 1")
    if any(not 0 <= p <= 1 for p in sim["perturbation"]):
        raise ConfigError("simulator.perturbation values must lie in [0, 1]")
    if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool):
        raise ConfigError("seed must be an integer")
    tf = cfg["corpus"]["test_fraction"]
    if not isinstance(tf, (int, float)) or not 0 < tf < 1:
        raise ConfigError("corpus.test_fraction must lie in (0, 1)")
    eo = cfg["corpus"]["extra_orderings"]
    if not isinstance(eo, int) or eo < 0:
        raise ConfigError("corpus.extra_orderings must be a non-negative integer")
    lm = cfg["lm"]
    if not isinstance(lm["order"], int) or lm["order"] < 2:
        raise ConfigError("lm.order must be an integer >= 2")
    if not isinstance(lm["alpha"], (int, float)) or not 0 < lm["alpha"] < 1:
        raise ConfigError("lm.alpha must lie in (0, 1)")
    try:
        GenerationParams(**cfg["generator"])
    except (TypeError, ValueError) as err:
        raise ConfigError(f"generator: {err}") from err
    runs = _as_list(cfg["experiments"]["run"], "experiments.run", int)
    if any(n not in (1, 2, 3, 4) for n in runs):
        raise ConfigError("experiments.run entries must be 1..4")
    cfg["experiments"]["run"] = runs
    return cfg


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Defaults, then the file at ``path``, then ``overrides``."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file {p} does not exist")
        raw = p.read_bytes()
        try:
            doc = json.loads(raw) if p.suffix == ".json" else tomllib.loads(raw.decode("utf-8"))
        except (ValueError, tomllib.TOMLDecodeError) as err:
            raise ConfigError(f"cannot parse {p}: {err}") from err
        if not isinstance(doc, dict):
            raise ConfigError(f"{p} must hold a table")
        _merge(cfg, doc)
    if overrides:
        _merge(cfg, overrides)
    return validate(cfg)


def generation_params(cfg: dict) -> GenerationParams:
    return GenerationParams(**cfg["generator"])
