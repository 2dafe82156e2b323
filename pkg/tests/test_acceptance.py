"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line verdict in ``RESULTS``; the conftest prints them
in the terminal summary.
"""

import random
import resource
import subprocess
import sys
import time

import pytest

from helpers import brute_isomorphic, permuted, random_graph, random_typed_graph
from scgmine.cli import grid_configs, main
from scgmine.config import load_config
from scgmine.corpus import build_corpus
from scgmine.diff import compute_difference, extract_scg, scg_components
from scgmine.edgelist import EdgeListDocument, parse, serialize
from scgmine.experiments import Dataset, run_experiment
from scgmine.generator import Candidate, GenerationStats, generate_edit_patterns
from scgmine.graph import LabeledGraph, is_isomorphic, wl_hash
from scgmine.lm import train_ngram
from scgmine.manifest import MANIFEST, manifest_hash
from scgmine.metamodel import simple_component_metamodel, validate_scg_typing
from scgmine.ranking import RankingMetric, ap_at_k, completion_score, map_at_k, rank, spearman
from scgmine.simulator import apply_rule, builtin_rules, initial_model, simulate_repository

RESULTS = {}
RULES = builtin_rules()
TG = simple_component_metamodel()
LISTING = "t # 1\ne 0 1 Add_port Add_Component Add_Port\ne 0 2 Add_requirement Add_Component Add_Requirement\n"


def verdict(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def grid():
    """Every grid dataset, simulated and trained as the pipeline would."""
    cfg = load_config()
    out = []
    for sc in grid_configs(cfg):
        models = simulate_repository(sc)[0]
        corpus = build_corpus(models, seed=cfg["seed"])
        out.append(Dataset(sc.name, sc, corpus, train_ngram(corpus.train)))
    return out


def p0(datasets):
    return [d for d in datasets if d.config.perturbation_prob == 0]


def test_criterion_01_roundtrip_and_format():
    start = time.monotonic()
    rng = random.Random(20240101)
    bad = 0
    for _ in range(1000):
        g = random_typed_graph(rng, 5, 50)
        if not is_isomorphic(parse(serialize(g))[1], g):
            bad += 1
    listing = LabeledGraph({0: "Add_Component", 1: "Add_Port", 2: "Add_Requirement"},
                           [(0, 1, "Add_port"), (0, 2, "Add_requirement")])
    exact = serialize(listing, 1) == LISTING
    elapsed = time.monotonic() - start
    verdict(1, bad == 0 and exact and elapsed < 10,
            f"1000 round-trips, {bad} failures; listing bytes exact={exact}; {elapsed:.1f}s (< 10s)")


def test_criterion_02_isomorphism_oracle():
    start = time.monotonic()
    rng = random.Random(2)
    samples = []
    while len(samples) < 200:
        g = random_graph(rng, 1, 6, node_labels="AB", edge_labels="rs", density=0.3, loops=True)
        samples.append(g)
        # permuted copies and one-edge deletions make isomorphic and near-miss pairs common
        samples.append(permuted(g, rng) if rng.random() < 0.6 or not g.num_edges
                       else LabeledGraph(g.nodes, sorted(g.edges)[1:]))
    pairs = disagreements = 0
    for i, a in enumerate(samples):
        for b in samples[i:]:
            pairs += 1
            disagreements += is_isomorphic(a, b) != brute_isomorphic(a, b)
    wl_bad = 0
    rng = random.Random(3)
    for _ in range(500):
        g = random_graph(rng, 1, 20, node_labels="ABC", edge_labels="rst", loops=True)
        wl_bad += wl_hash(g) != wl_hash(permuted(g, rng, offset=rng.randint(0, 9)))
    elapsed = time.monotonic() - start
    verdict(2, disagreements == 0 and wl_bad == 0 and elapsed < 60,
            f"{pairs} pairs, {disagreements} disagreements with brute force; WL mismatches {wl_bad}/500; "
            f"{elapsed:.1f}s (< 60s)")


def test_criterion_03_simulator_soundness():
    start = time.monotonic()
    cfg = load_config()
    comps = unmatched = 0
    for sc in grid_configs(cfg):
        if sc.perturbation_prob != 0:
            continue
        models = simulate_repository(sc)[0]
        for old, new in zip(models, models[1:]):
            for c in scg_components(extract_scg(compute_difference(old, new))):
                comps += 1
                unmatched += not any(is_isomorphic(c, r.pattern) for r in RULES)
    rng = random.Random(300)
    base = initial_model().snapshot(models[0].type_graph)
    single_bad = 0
    for i in range(300):
        rule = RULES[i % 3]
        after, _ = apply_rule(base, rule, rng)
        single_bad += not is_isomorphic(extract_scg(compute_difference(base, after)), rule.pattern)
    elapsed = time.monotonic() - start
    verdict(3, unmatched == 0 and single_bad == 0 and elapsed < 120,
            f"{comps} components on p=0 datasets, {unmatched} unmatched; single applications {300 - single_bad}/300; "
            f"{elapsed:.1f}s (< 120s)")


def test_criterion_04_validity(grid):
    invalid_post = 0
    for ds in p0(grid):
        for c in generate_edit_patterns(ds.backend, stats=GenerationStats()):
            g = parse(c.text)[1]
            invalid_post += bool(validate_scg_typing(g, TG))
    rep = run_experiment(1, grid)
    for row in rep.rows:
        print(f"  {row['dataset']}: syntax rejections {row['invalid_graphs']}, "
              f"metamodel rejections {row['invalid_scgs']}, proposals {row['proposals']}")
    xs = [r["invalid_graphs"] + r["invalid_scgs"] for r in rep.rows]
    ps = [r["perturbation"] for r in rep.rows]
    rho = spearman(xs, ps)
    p1_syntax = [r["invalid_graphs"] for r in rep.rows if r["perturbation"] == 1.0]
    verdict(4, invalid_post == 0 and rho >= 0,
            f"{invalid_post} invalid post-filter candidates on p=0; Spearman(invalid, p) = {rho:.3f} (>= 0); "
            f"p=1 syntax rejections {p1_syntax}")


def test_criterion_05_completion(grid):
    start = time.monotonic()
    rep = run_experiment(2, p0(grid))
    worst_found = min(r["correct_found"] for r in rep.rows)
    worst_len = max(r["mean_candidates"] for r in rep.rows)
    worst_rank = max(r["mean_correct_rank"] for r in rep.rows)
    per_ds = (time.monotonic() - start) / len(rep.rows)
    ok = worst_found >= 0.8 and worst_len <= 10 and worst_rank <= 2.0 and per_ds < 300
    verdict(5, ok, f"worst dataset: correct found {worst_found:.3f} (>= 0.8), mean candidates {worst_len:.2f} (<= 10), "
                   f"correct rank {worst_rank:.2f} (<= 2.0); {per_ds:.1f}s per dataset")


def test_criterion_06_pattern_retrieval(grid):
    rep = run_experiment(3, p0(grid))
    d20 = [r["retrieved"] for r in rep.rows if r["revisions"] == 20]
    mean = sum(r["retrieved"] for r in rep.rows) / len(rep.rows)
    verdict(6, min(d20) >= 2 and mean >= 2.0,
            f"d=20 retrieved {d20} (each >= 2); mean over p=0 datasets {mean:.2f} (>= 2.0)")


def test_criterion_07_metric_fixtures():
    rel = [LabeledGraph({0: f"Add_T{i}", 1: "Add_Port"}, [(0, 1, "Add_port")]) for i in range(3)]
    miss = LabeledGraph({0: "Add_Package", 1: "Add_Component"}, [(0, 1, "Add_component")])
    checks = {
        "AP@3 = 7/18": ap_at_k([miss, rel[0], rel[1]], rel, 3) == pytest.approx(7 / 18, abs=1e-15),
        "AP perfect": ap_at_k(rel, rel, 3) == 1.0,
        "AP none": ap_at_k([miss], rel, 3) == 0.0,
        "MAP of 1 and 0": map_at_k([(rel, rel), ([miss], rel)], 3) == 0.5,
        "rho = 0.5": spearman([1, 2, 3], [2, 1, 3]) == pytest.approx(0.5, abs=1e-15),
        "rho self": spearman([4, 1, 3], [4, 1, 3]) == pytest.approx(1.0),
        "completion 3/2/1/0": [completion_score(rel[0], rel[0]),
                               completion_score(LabeledGraph({0: "Add_T0", 1: "Add_Port", 2: "Add_Port"},
                                                             [(0, 1, "Add_port"), (0, 2, "Add_port")]), rel[0]),
                               completion_score(LabeledGraph(), rel[0]),
                               completion_score(miss, rel[0])] == [3, 2, 1, 0],
    }
    rng = random.Random(7)
    cands = [Candidate(EdgeListDocument.from_graph(g), (), token_logprobs=(rng.choice([-1.0, -2.0]),))
             for g in rel + [miss]]
    reference = [c.text for c in rank(cands, RankingMetric.PROBABILITY)]
    stable = True
    for _ in range(1000):
        rng.shuffle(cands)
        stable &= [c.text for c in rank(cands, RankingMetric.PROBABILITY)] == reference
    checks["rank permutation-invariant (1000 shuffles)"] = stable
    failed = [k for k, v in checks.items() if not v]
    verdict(7, not failed, f"{len(checks) - len(failed)}/{len(checks)} fixtures exact" +
            (f"; failed: {failed}" if failed else ""))


def test_criterion_08_ranking_comparison(grid):
    rep = run_experiment(4, p0(grid))
    table = rep.aggregate["map"]
    shape = len(table) == 4 and all(len(v) == 4 for v in table.values())
    prob, es, comp = table["Probability"]["inf"], table["EdgesScaled"]["inf"], table["Compression"]["inf"]
    verdict(8, shape and comp > prob and es > prob,
            f"4x4 table={shape}; MAP@inf Compression {comp:.3f}, EdgesScaled {es:.3f} vs Probability {prob:.3f}")


def _tree(root):
    return {p.relative_to(root): p for p in sorted(root.rglob("*")) if p.is_file()}


def test_criterion_09_determinism(tmp_path):
    cfg = tmp_path / "two.toml"
    cfg.write_text("seed = 5\n[simulator]\nrevisions = [10]\nops_per_revision = [11]\nperturbation = [0.0, 1.0]\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["pipeline", "--config", str(cfg), "--out", str(a), "--jobs", "1"]) == 0
    assert main(["pipeline", "--config", str(cfg), "--out", str(b), "--jobs", "2"]) == 0
    ta, tb = _tree(a), _tree(b)
    differing = [str(k) for k in ta if k.name != MANIFEST and ta[k].read_bytes() != tb.get(k, ta[k]).read_bytes()]
    manifests = [k.parent for k in ta if k.name == MANIFEST]
    bad_manifests = [str(m) for m in manifests if manifest_hash(a / m) != manifest_hash(b / m)]
    same_keys = ta.keys() == tb.keys()
    verdict(9, same_keys and not differing and not bad_manifests,
            f"{len(ta)} files, {len(differing)} differing, {len(bad_manifests)} manifest mismatches "
            f"(timestamps excluded; serial vs 2 workers)")


def test_criterion_10_budget(tmp_path):
    cfg = tmp_path / "tiny.toml"
    cfg.write_text("seed = 0\n[simulator]\nrevisions = [10]\nops_per_revision = [11]\nperturbation = [0.0]\n")
    argv = [sys.executable, "-m", "scgmine.cli", "pipeline", "--config", str(cfg),
            "--out", str(tmp_path / "out"), "--jobs", "1"]
    # a fresh wrapper so the peak RSS belongs to the pipeline alone, not to earlier children of pytest
    wrapper = ("import resource, subprocess, sys\n"
               f"rc = subprocess.run({argv!r}, capture_output=True).returncode\n"
               "print(rc, resource.getrusage(resource.RUSAGE_CHILDREN).ru_maxrss)\n")
    start = time.monotonic()
    res = subprocess.run([sys.executable, "-c", wrapper], capture_output=True, text=True, check=True)
    elapsed = time.monotonic() - start
    rc, peak_kb = (int(x) for x in res.stdout.split())
    peak_mb = peak_kb / 1024
    verdict(10, rc == 0 and elapsed < 300 and peak_mb < 1024,
            f"tiny pipeline exit {rc}, {elapsed:.1f}s (< 300s), peak RSS {peak_mb:.0f} MB (< 1024 MB)")
