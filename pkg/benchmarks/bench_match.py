"""Compare the compiled and pure-Python subgraph-matching kernels.

Counts embeddings of the prefix-stripped builtin rule patterns in the last
revision of a simulated repository, plus isomorphism checks between SCG
components, and reports the median wall time per kernel.

    python3 benchmarks/bench_match.py --revisions 10 --ops 31 --repeat 5
"""

from __future__ import annotations

import argparse
import statistics
import time

from scgmine import _match_py
from scgmine.diff import compute_difference, extract_scg, scg_components
from scgmine.graph import count_embeddings, is_isomorphic
from scgmine.metamodel import strip_prefixes
from scgmine.simulator import SimulationConfig, builtin_rules, simulate_repository

try:
    from scgmine import _match as _match_c
except ImportError:
    _match_c = None


def _time(fn, repeat):
    runs = []
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs), result


def workloads(revisions, ops, perturbation):
    models, _ = simulate_repository(SimulationConfig(revisions, ops, perturbation, seed=7))
    host = models[-1].graph
    patterns = [strip_prefixes(r.pattern) for r in builtin_rules()]
    comps = []
    for old, new in zip(models, models[1:]):
        comps.extend(scg_components(extract_scg(compute_difference(old, new))))

    def embeddings(kernel):
        return lambda: [count_embeddings(p, host, budget=0, kernel=kernel) for p in patterns]

    def isomorphisms(kernel):
        sample = comps[:200]
        return lambda: sum(is_isomorphic(a, b, kernel=kernel) for a in sample[:40] for b in sample)

    return host, {"count_embeddings": embeddings, "is_isomorphic": isomorphisms}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--revisions", type=int, default=10)
    ap.add_argument("--ops", type=int, default=31)
    ap.add_argument("--perturbation", type=float, default=0.5)
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args(argv)

    host, loads = workloads(a.revisions, a.ops, a.perturbation)
    print(f"host: {host.num_nodes} nodes, {host.num_edges} edges")
    kernels = [("python", _match_py)]
    if _match_c is not None:
        kernels.insert(0, ("cython", _match_c))
    else:
        print("compiled kernel not built; timing the Python kernel only")
    print(f"{'workload':<18}{'kernel':<8}{'median s':>10}{'speedup':>9}")
    for name, make in loads.items():
        base = None
        results = {}
        timings = []
        for kname, kern in kernels:
            t, res = _time(make(kern), a.repeat)
            results[kname] = res
            timings.append((kname, t))
        base = dict(timings)["python"]
        for kname, t in timings:
            print(f"{name:<18}{kname:<8}{t:>10.4f}{base / t:>8.1f}x")
        if len(set(map(str, results.values()))) != 1:
            raise SystemExit(f"kernels disagree on {name}: {results}")


if __name__ == "__main__":
    main()
