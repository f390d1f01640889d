#!/usr/bin/env python3
"""Time the compiled matching kernel against the pure-Python twin.

Workload: induced-occurrence counting of patterns of growing size inside
random typed DAGs, the hot loop of enumeration ground truth, candidate
verification, and the search's bucket resolution.

Run:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from motifdiff import _iso_py
from motifdiff.graphs import TypedDigraph, induced_subgraph

try:
    from motifdiff import _motifcore
except ImportError:
    _motifcore = None


def random_dag(rng, n, a=3, b=2, density=0.3):
    nt = rng.integers(0, a, size=n).astype(np.int32)
    et = np.zeros((n, n), dtype=np.int32)
    for j in range(1, n):
        for i in range(j):
            if rng.random() < density:
                et[i, j] = rng.integers(1, b)
        if not np.any(et[:j, j]):
            et[int(rng.integers(0, j)), j] = 1
    return TypedDigraph(nt, et, (a, b))


def workload(rng, host_n, k, cases):
    out = []
    for _ in range(cases):
        host = random_dag(rng, host_n)
        subset = sorted(rng.choice(host_n, size=k, replace=False).tolist())
        sub = induced_subgraph(host, subset)
        out.append((sub, host))
    return out


def run(impl, cases):
    start = time.perf_counter()
    totals = 0
    for sub, host in cases:
        totals += impl.count_mappings(
            sub.node_types, sub.edge_types, host.node_types, host.edge_types)
    return time.perf_counter() - start, totals


def main():
    rng = np.random.default_rng(0)
    print(f"{'host n':>7} {'k':>3} {'cases':>6} {'python (s)':>11} "
          f"{'compiled (s)':>13} {'speedup':>8}")
    for host_n, k, cases in [(12, 4, 200), (16, 5, 100), (20, 6, 50),
                             (24, 7, 20), (28, 8, 10)]:
        cases_data = workload(rng, host_n, k, cases)
        py_time, py_total = run(_iso_py, cases_data)
        if _motifcore is None:
            print(f"{host_n:>7} {k:>3} {cases:>6} {py_time:>11.3f} "
                  f"{'unavailable':>13} {'-':>8}")
            continue
        cy_time, cy_total = run(_motifcore, cases_data)
        assert py_total == cy_total, "kernel outputs diverged"
        print(f"{host_n:>7} {k:>3} {cases:>6} {py_time:>11.3f} "
              f"{cy_time:>13.3f} {py_time / cy_time:>7.1f}x")


if __name__ == "__main__":
    main()
