"""Command-line front end: generate, mst, verify, bench.

Exit codes: 0 success, 1 verification mismatch, 2 invalid usage or
parameters, 3 I/O or parse failure. Reports go to stdout, diagnostics
to stderr.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from .data import DatasetSpec, generate, read_edges, read_points, sample, write_edges, write_points
from .errors import EmstError, ParseError
from .metric import Euclidean, MutualReachability, CoreDistances
from .mst import MstResult, boruvka_emst
from .oracle import ORACLE_CAP, brute_core_distances, prim_mst


def _fmt(x: float) -> str:
    return f"{x:.9g}"


@dataclass
class BenchReport:
    """One benchmark row: medians of `repeats` runs at one size."""

    dataset: str
    n: int
    d: int
    metric: str
    k_pts: int
    threads: int
    repeats: int
    iterations: int
    leaf_distance_evals: int
    t_tree: float
    t_core: float
    t_mst: float
    t_total: float
    rate: float
    time_ratio_prev: float

    HEADER = "\t".join([
        "dataset", "n", "d", "metric", "k_pts", "threads", "repeats",
        "iterations", "leaf_evals", "t_tree", "t_core", "t_mst",
        "t_total", "rate", "time_ratio_prev",
    ])

    def row(self) -> str:
        return "\t".join([
            self.dataset, str(self.n), str(self.d), self.metric,
            str(self.k_pts), str(self.threads), str(self.repeats),
            str(self.iterations), str(self.leaf_distance_evals),
            _fmt(self.t_tree), _fmt(self.t_core), _fmt(self.t_mst),
            _fmt(self.t_total), _fmt(self.rate), _fmt(self.time_ratio_prev),
        ])


def run_bench(points, sizes, *, repeats: int = 3, metric: str = "euclidean",
              k_pts: int = 1, threads: int = 0, dataset: str = "points",
              seed: int = 0) -> list[BenchReport]:
    """Benchmark the engine at several subsample sizes.

    Each size gets its own seeded subsample; medians are taken over
    `repeats` runs. The rate column is n * d / t_total, features per
    second. One small untimed run first absorbs jit loading.
    """
    if repeats < 1:
        raise EmstError(f"repeats must be >= 1, got {repeats}")
    pts = np.asarray(points)
    n, d = pts.shape
    warm = sample(pts, min(n, 256), seed)
    boruvka_emst(warm, metric=metric, k_pts=min(k_pts, warm.shape[0]),
                 threads=threads)

    reports: list[BenchReport] = []
    prev_total = None
    for idx, m in enumerate(sizes):
        if not 1 <= m <= n:
            raise EmstError(f"sample size {m} out of range for {n} points")
        sub = sample(pts, m, seed + 1 + idx) if m < n else pts
        runs: list[MstResult] = [
            boruvka_emst(sub, metric=metric, k_pts=k_pts, threads=threads)
            for _ in range(repeats)
        ]
        t_tree = float(np.median([r.phase_timings["tree"] for r in runs]))
        t_core = float(np.median([r.phase_timings["core"] for r in runs]))
        t_mst = float(np.median([r.phase_timings["mst"] for r in runs]))
        t_total = float(np.median([r.phase_timings["total"] for r in runs]))
        reports.append(BenchReport(
            dataset=dataset, n=m, d=d, metric=metric, k_pts=k_pts,
            threads=runs[0].threads, repeats=repeats,
            iterations=runs[0].iterations,
            leaf_distance_evals=runs[0].leaf_distance_evals,
            t_tree=t_tree, t_core=t_core, t_mst=t_mst, t_total=t_total,
            rate=m * d / t_total if t_total > 0 else float("inf"),
            time_ratio_prev=t_total / prev_total if prev_total else float("nan"),
        ))
        prev_total = t_total
    return reports


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="point file, or - for stdin")
    p.add_argument("--format", choices=["csv", "bin"], default="csv",
                   help="input encoding (default csv)")


def _add_metric_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--metric", choices=["euclidean", "mrd"], default="euclidean",
                   help="edge weight metric (default euclidean)")
    p.add_argument("--k-pts", type=int, default=1, dest="k_pts",
                   help="mutual-reachability neighbour count, self included")
    p.add_argument("--threads", type=int, default=0,
                   help="worker threads, 0 = all available")


def _summary_line(res: MstResult, n: int, d: int, metric: str, k_pts: int) -> str:
    t = res.phase_timings
    rate = n * d / t["total"] if t["total"] > 0 else float("inf")
    fields = [
        f"n={n}", f"d={d}", f"metric={metric}", f"k_pts={k_pts}",
        f"threads={res.threads}", f"iterations={res.iterations}",
        f"edges={res.edges.shape[0]}",
        f"total_weight={res.total_weight:.17g}",
        f"leaf_evals={res.leaf_distance_evals}",
        f"t_tree={_fmt(t['tree'])}", f"t_core={_fmt(t['core'])}",
        f"t_mst={_fmt(t['mst'])}", f"t_total={_fmt(t['total'])}",
        f"rate={_fmt(rate)}",
    ]
    return " ".join(fields)


def _cmd_generate(args) -> int:
    spec = DatasetSpec(kind=args.kind, n=args.n, d=args.d, seed=args.seed,
                       blobs=args.blobs, spread=args.spread)
    pts = generate(spec)
    write_points(args.out, pts, fmt=args.format, precision=args.precision)
    return 0


def _cmd_mst(args) -> int:
    pts = read_points(args.input, fmt=args.format)
    res = boruvka_emst(pts, metric=args.metric, k_pts=args.k_pts,
                       threads=args.threads,
                       subtree_skip=not args.no_opt1,
                       upper_bound_seeding=not args.no_opt2)
    summary = _summary_line(res, pts.shape[0], pts.shape[1], args.metric, args.k_pts)
    if args.out is not None:
        write_edges(args.out, res.edges, res.weights)
        print(summary)
    else:
        write_edges(sys.stdout, res.edges, res.weights)
        print(summary, file=sys.stderr)
    return 0


def _cmd_verify(args) -> int:
    pts = read_points(args.input, fmt=args.format)
    n = pts.shape[0]
    if n > args.cap:
        raise EmstError(
            f"verification is capped at {args.cap} points, got {n}; "
            f"raise --cap at your own patience")
    if args.metric == "mrd":
        cores = CoreDistances(args.k_pts, brute_core_distances(pts, args.k_pts, cap=args.cap))
        oracle_metric = MutualReachability(cores)
    else:
        oracle_metric = Euclidean()
    reference = prim_mst(pts, oracle_metric, cap=args.cap)

    if args.edges is not None:
        sub_edges, sub_weights = read_edges(args.edges)
        order = np.lexsort((sub_edges[:, 1], sub_edges[:, 0], sub_weights))
        sub_edges = sub_edges[order]
        sub_weights = sub_weights[order]
        source = args.edges
    else:
        res = boruvka_emst(pts, metric=args.metric, k_pts=args.k_pts,
                           threads=args.threads)
        sub_edges, sub_weights = res.edges, res.weights
        source = "engine"

    mismatches = 0
    if sub_edges.shape[0] != reference.edges.shape[0]:
        print(f"edge count differs: {source} has {sub_edges.shape[0]}, "
              f"reference has {reference.edges.shape[0]}", file=sys.stderr)
        mismatches += abs(sub_edges.shape[0] - reference.edges.shape[0])
    limit = min(sub_edges.shape[0], reference.edges.shape[0])
    pair_bad = np.any(sub_edges[:limit] != reference.edges[:limit], axis=1)
    ref_w = reference.weights[:limit]
    tol = args.tolerance * np.maximum(1.0, np.abs(ref_w))
    weight_bad = np.abs(sub_weights[:limit] - ref_w) > tol
    bad = np.flatnonzero(pair_bad | weight_bad)
    for row in bad[:10]:
        print(f"edge {row}: {source} ({sub_edges[row, 0]},{sub_edges[row, 1]},"
              f"{sub_weights[row]:.17g}) vs reference ({reference.edges[row, 0]},"
              f"{reference.edges[row, 1]},{ref_w[row]:.17g})", file=sys.stderr)
    mismatches += int(bad.shape[0])
    if mismatches:
        print(f"FAIL: {mismatches} mismatched edges", file=sys.stderr)
        return 1
    max_err = float(np.max(np.abs(sub_weights - reference.weights))) if limit else 0.0
    print(f"verified n={n} edges={limit} metric={args.metric} "
          f"k_pts={args.k_pts} max_abs_err={max_err:.3g}")
    return 0


def _cmd_bench(args) -> int:
    if args.input is not None:
        pts = read_points(args.input, fmt=args.format)
        dataset = args.input
    else:
        if args.kind is None:
            raise EmstError("bench needs an input file or --kind/--n/--d")
        spec = DatasetSpec(kind=args.kind, n=args.n, d=args.d, seed=args.seed)
        pts = generate(spec)
        dataset = f"{args.kind}-{args.n}-{args.d}d-s{args.seed}"
    try:
        sizes = [int(tok) for tok in args.samples.split(",") if tok]
    except ValueError:
        raise EmstError(f"could not parse --samples {args.samples!r}") from None
    if not sizes:
        raise EmstError("--samples must list at least one size")
    reports = run_bench(pts, sizes, repeats=args.repeats, metric=args.metric,
                        k_pts=args.k_pts, threads=args.threads,
                        dataset=dataset, seed=args.seed)
    print(BenchReport.HEADER)
    for rep in reports:
        print(rep.row())
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emst",
        description="Euclidean and mutual-reachability minimum spanning trees",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset")
    p.add_argument("--kind", choices=["uniform", "normal", "blobs"], required=True)
    p.add_argument("--n", type=int, required=True, help="number of points")
    p.add_argument("--d", type=int, choices=[2, 3], required=True, help="dimension")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--blobs", type=int, default=8, help="blob count (blobs kind)")
    p.add_argument("--spread", type=float, default=0.05, help="blob sigma (blobs kind)")
    p.add_argument("--out", default="-", help="output path, - for stdout")
    p.add_argument("--format", choices=["csv", "bin"], default="csv")
    p.add_argument("--precision", type=int, choices=[4, 8], default=4,
                   help="bytes per coordinate (bin format)")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("mst", help="compute a minimum spanning tree")
    _add_input_args(p)
    _add_metric_args(p)
    p.add_argument("--out", default=None, help="edge file path; stdout when omitted")
    p.add_argument("--no-opt1", action="store_true",
                   help="disable same-component subtree skipping")
    p.add_argument("--no-opt2", action="store_true",
                   help="disable upper-bound radius seeding")
    p.set_defaults(func=_cmd_mst)

    p = sub.add_parser("verify", help="check results against a brute-force reference")
    _add_input_args(p)
    _add_metric_args(p)
    p.add_argument("--edges", default=None,
                   help="verify this edge file instead of a fresh engine run")
    p.add_argument("--cap", type=int, default=ORACLE_CAP,
                   help=f"reference size limit (default {ORACLE_CAP})")
    p.add_argument("--tolerance", type=float, default=1e-9,
                   help="relative weight tolerance (default 1e-9)")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("bench", help="time the engine over subsample sizes")
    p.add_argument("input", nargs="?", default=None,
                   help="point file; omit to generate with --kind/--n/--d")
    p.add_argument("--format", choices=["csv", "bin"], default="csv")
    p.add_argument("--kind", choices=["uniform", "normal", "blobs"], default=None)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--d", type=int, choices=[2, 3], default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", required=True,
                   help="comma-separated subsample sizes, e.g. 1000,10000")
    p.add_argument("--repeats", type=int, default=3)
    _add_metric_args(p)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except EmstError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())
