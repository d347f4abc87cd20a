"""
Measuring throughput across problem sizes
=========================================

The benchmark harness runs the solver on nested samples of one
dataset, takes the median of a few repeats, and reports per-phase
times plus a throughput rate of n*d / t_total: input features
processed per second. On a linear-time solver the rate should hold
roughly flat as n grows, and time_ratio_prev should track the size
ratio between consecutive rows.
"""

from emst import DatasetSpec, boruvka_emst, generate
from emst.cli import BenchReport, run_bench

points = generate(DatasetSpec("uniform", n=200_000, d=2, seed=0))

reports = run_bench(points, sizes=[25_000, 50_000, 100_000, 200_000],
                    repeats=3, metric="euclidean", k_pts=1, threads=0,
                    dataset="uniform", seed=0)

print(BenchReport.HEADER)
for r in reports:
    print(r.row())

# The same harness drives the mutual reachability variant; the core
# distance phase then shows up with a nonzero share.
reach = run_bench(points, sizes=[100_000], repeats=3, metric="mrd",
                  k_pts=16, threads=0, dataset="uniform", seed=0)[0]
share = reach.t_core / reach.t_total
print(f"\nmrd k=16 at n=100000: core phase is {100 * share:.0f}% of total,"
      f" rate {reach.rate:.3g} features/s")

# Phase accounting is part of the contract: construction, core
# distances, and the merge rounds are timed separately and sum to the
# total.
r = reports[-1]
gap = abs(r.t_tree + r.t_core + r.t_mst - r.t_total) / r.t_total
print(f"phase sum within {100 * gap:.2f}% of wall total at n={r.n}")
