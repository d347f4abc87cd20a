"""Parallel single-tree Boruvka over a shared hierarchy.

Each iteration runs four phases against one spatial tree:

1. reduce labels    - every internal node learns whether its subtree
                      lies in a single component (that label) or spans
                      several (MIXED).
2. upper bounds     - each component is seeded with the weight of some
                      real outgoing edge, read off adjacent Z-order
                      pairs that straddle a component boundary.
3. find edges       - every point runs one constrained nearest-
                      neighbour traversal for the cheapest edge leaving
                      its component; per-component minima are folded
                      under the total edge order (weight, u, v).
4. merge            - components follow their chosen edges; each chain
                      ends in a mutual pair, the whole chain collapses
                      onto one label, and the chosen edges join the
                      tree. Component count at least halves, so there
                      are at most ceil(log2 n) iterations.

Parallel phases write only per-item slots and all cross-item
reductions run serially in index order, so results are identical for
any thread count.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import numba
from numba import njit, prange
from numpy.typing import ArrayLike, NDArray

from .bvh import STACK_CAPACITY, Bvh, _box_dist, _point_dist, build
from .errors import (
    DimensionMismatchError,
    InternalInvariantViolation,
    InvalidParameterError,
    NoOutgoingEdgeError,
    NothingToFindError,
    TraversalStackOverflowError,
)
from .geometry import as_point_array
from .metric import (
    CoreDistances,
    Euclidean,
    Metric,
    MutualReachability,
    compute_core_distances,
    core_array,
)

# Label of an internal node whose subtree spans several components.
MIXED = -1

_FIND_BLOCK = 4096


@dataclass(frozen=True)
class WeightedEdge:
    """Undirected weighted edge with canonical endpoint order u < v.

    Edges compare by (weight, u, v); this total order is what every
    tie is broken with, so minima are unique and the tree is too.
    """

    u: int
    v: int
    weight: float

    def __post_init__(self):
        if self.u == self.v:
            raise InvalidParameterError(f"self edge at {self.u}")
        if self.u < 0 or self.v < 0:
            raise InvalidParameterError("edge endpoints must be non-negative")
        if self.u > self.v:
            u, v = self.v, self.u
            object.__setattr__(self, "u", u)
            object.__setattr__(self, "v", v)

    @property
    def key(self) -> tuple[float, int, int]:
        return (self.weight, self.u, self.v)

    def __lt__(self, other: "WeightedEdge") -> bool:
        return self.key < other.key


@dataclass
class ComponentState:
    """Mutable component bookkeeping threaded through the phases.

    labels[i] is the representative (smallest point index) of point
    i's component; internal_labels mirrors that onto tree nodes with
    MIXED for heterogeneous subtrees; upper_bounds[r] is a seeded
    search radius per representative.
    """

    labels: NDArray[np.int64]
    internal_labels: NDArray[np.int64]
    upper_bounds: NDArray[np.float64]

    @classmethod
    def initial(cls, bvh: Bvh) -> "ComponentState":
        n = bvh.num_points
        return cls(
            labels=np.arange(n, dtype=np.int64),
            internal_labels=np.full(max(n - 1, 0), MIXED, dtype=np.int64),
            upper_bounds=np.full(n, np.inf, dtype=np.float64),
        )

    @property
    def num_components(self) -> int:
        return int(np.unique(self.labels).shape[0])


@dataclass
class OutgoingEdges:
    """Cheapest outgoing edge per live component.

    reps lists the live representatives ascending; u, v, w are full
    n-sized arrays indexed by representative.
    """

    reps: NDArray[np.int64]
    u: NDArray[np.int64]
    v: NDArray[np.int64]
    w: NDArray[np.float64]
    leaf_distance_evals: int

    def edge(self, rep: int) -> WeightedEdge:
        if self.v[rep] < 0:
            raise NoOutgoingEdgeError(f"component {rep} has no recorded edge")
        return WeightedEdge(int(self.u[rep]), int(self.v[rep]), float(self.w[rep]))


@dataclass
class MergeOutcome:
    """Result of collapsing the component graph for one iteration."""

    num_components: int
    edge_u: NDArray[np.int64]
    edge_v: NDArray[np.int64]
    edge_w: NDArray[np.float64]
    new_reps: NDArray[np.int64]

    @property
    def edges(self) -> list[WeightedEdge]:
        return [
            WeightedEdge(int(u), int(v), float(w))
            for u, v, w in zip(self.edge_u, self.edge_v, self.edge_w)
        ]


@dataclass
class MstResult:
    """A finished spanning tree plus run instrumentation.

    edges is (n - 1, 2) int64 with u < v per row, sorted by
    (weight, u, v); weights aligns with it. phase_timings holds
    seconds for tree / core / reduce_labels / upper_bounds /
    find_edges / merge / mst / total; component_counts starts at n
    and strictly decreases per iteration.
    """

    edges: NDArray[np.int64]
    weights: NDArray[np.float64]
    total_weight: float
    iterations: int
    phase_timings: dict[str, float] = field(default_factory=dict)
    component_counts: list[int] = field(default_factory=list)
    leaf_distance_evals: int = 0
    threads: int = 1

    def edge_list(self) -> list[WeightedEdge]:
        return [
            WeightedEdge(int(u), int(v), float(w))
            for (u, v), w in zip(self.edges, self.weights)
        ]


@njit(parallel=True, cache=True)
def _reduce_labels_kernel(order, starts, left, right, leaf_perm, labels, internal_labels):
    m = left.shape[0]
    for lev in range(starts.shape[0] - 1):
        for oi in prange(starts[lev], starts[lev + 1]):
            v = order[oi]
            lc = left[v]
            rc = right[v]
            ll = labels[leaf_perm[lc - m]] if lc >= m else internal_labels[lc]
            rl = labels[leaf_perm[rc - m]] if rc >= m else internal_labels[rc]
            internal_labels[v] = ll if ll == rl else MIXED


@njit(cache=True)
def _upper_bounds_kernel(coords, leaf_perm, labels, cores, out):
    # Adjacent Z-order pairs in different components are real outgoing
    # edges; their weights seed both components' search radii. Serial
    # fold in slot order keeps the result schedule-independent.
    n = coords.shape[0]
    d = coords.shape[1]
    for s in range(n - 1):
        a = leaf_perm[s]
        b = leaf_perm[s + 1]
        la = labels[a]
        lb = labels[b]
        if la == lb:
            continue
        acc = 0.0
        for k in range(d):
            dx = np.float64(coords[a, k]) - np.float64(coords[b, k])
            acc += dx * dx
        w = math.sqrt(acc)
        if cores[a] > w:
            w = cores[a]
        if cores[b] > w:
            w = cores[b]
        if w < out[la]:
            out[la] = w
        if w < out[lb]:
            out[lb] = w


@njit(parallel=True, cache=True)
def _find_edges_kernel(coords, leaf_perm, left, right, box_lo, box_hi,
                       labels, internal_labels, bounds, cores,
                       use_bounds, skip_subtrees,
                       cand_u, cand_v, cand_w, eval_counts, overflow):
    n = coords.shape[0]
    m = n - 1
    d = coords.shape[1]
    nblocks = (n + _FIND_BLOCK - 1) // _FIND_BLOCK
    for b in prange(nblocks):
        qbuf = np.empty(d, dtype=np.float64)
        node_stack = np.empty(STACK_CAPACITY, dtype=np.int64)
        dist_stack = np.empty(STACK_CAPACITY, dtype=np.float64)
        evals = 0
        for s in range(b * _FIND_BLOCK, min(n, (b + 1) * _FIND_BLOCK)):
            qp = leaf_perm[s]
            comp = labels[qp]
            cq = cores[qp]
            for kk in range(d):
                qbuf[kk] = np.float64(coords[qp, kk])
            radius = bounds[comp] if use_bounds else np.inf
            best_w = np.inf
            best_u = np.int64(-1)
            best_v = np.int64(-1)
            root_lb = _box_dist(box_lo, box_hi, 0, qbuf)
            if cq > root_lb:
                root_lb = cq
            node_stack[0] = 0
            dist_stack[0] = root_lb
            top = 1
            while top > 0:
                top -= 1
                if dist_stack[top] > radius:
                    continue
                ref = node_stack[top]
                lc = left[ref]
                rc = right[ref]
                push_a = np.int64(-1)
                push_a_d = 0.0
                push_b = np.int64(-1)
                push_b_d = 0.0
                for side in range(2):
                    child = lc if side == 0 else rc
                    if child >= m:
                        p = leaf_perm[child - m]
                        # the distance is computed before any test;
                        # this is what the eval counter measures
                        w = _point_dist(coords, p, qbuf)
                        evals += 1
                        if labels[p] == comp:
                            continue
                        if cores[p] > w:
                            w = cores[p]
                        if cq > w:
                            w = cq
                        if w <= radius:
                            if w < best_w or (w == best_w and (
                                    min(qp, p) < best_u or (
                                        min(qp, p) == best_u and max(qp, p) < best_v))):
                                best_w = w
                                best_u = min(qp, p)
                                best_v = max(qp, p)
                                radius = w
                    else:
                        if skip_subtrees and internal_labels[child] == comp:
                            continue
                        bd = _box_dist(box_lo, box_hi, child, qbuf)
                        if cq > bd:
                            bd = cq
                        if bd <= radius:
                            if push_a < 0:
                                push_a = child
                                push_a_d = bd
                            else:
                                push_b = child
                                push_b_d = bd
                if push_b >= 0:
                    if top + 2 > STACK_CAPACITY:
                        overflow[b] = 1
                        top = 0
                        continue
                    if push_b_d < push_a_d:
                        push_a, push_b = push_b, push_a
                        push_a_d, push_b_d = push_b_d, push_a_d
                    node_stack[top] = push_b
                    dist_stack[top] = push_b_d
                    top += 1
                    node_stack[top] = push_a
                    dist_stack[top] = push_a_d
                    top += 1
                elif push_a >= 0:
                    if top + 1 > STACK_CAPACITY:
                        overflow[b] = 1
                        top = 0
                        continue
                    node_stack[top] = push_a
                    dist_stack[top] = push_a_d
                    top += 1
            cand_u[qp] = best_u
            cand_v[qp] = best_v
            cand_w[qp] = best_w
        eval_counts[b] = evals


@njit(cache=True)
def _reduce_candidates_kernel(labels, cand_u, cand_v, cand_w, best_u, best_v, best_w):
    # Serial fold in point order: the per-component minimum under the
    # total edge order does not depend on visit order, the fixed order
    # just keeps the arithmetic deterministic.
    n = labels.shape[0]
    for q in range(n):
        v = cand_v[q]
        if v < 0:
            continue
        c = labels[q]
        w = cand_w[q]
        u = cand_u[q]
        if w < best_w[c] or (w == best_w[c] and (
                u < best_u[c] or (u == best_u[c] and v < best_v[c]))):
            best_w[c] = w
            best_u[c] = u
            best_v[c] = v


@njit(cache=True)
def _merge_kernel(reps, best_u, best_v, best_w, labels,
                  succ, terminal, cluster_min, final,
                  out_u, out_v, out_w, new_reps):
    # Follow each component's chosen edge to the component it points
    # at. Chains terminate in a mutual pair; the chain's clusters all
    # map onto the smallest representative among their members.
    # Error codes: -1 broken candidate, -2 unterminated chain.
    s = reps.shape[0]
    path = np.empty(s, dtype=np.int64)
    for idx in range(s):
        r = reps[idx]
        terminal[r] = -1
        cluster_min[r] = -1
        u = best_u[r]
        v = best_v[r]
        if v < 0:
            return -1, -1
        lu = labels[u]
        lv = labels[v]
        if lu == r and lv != r:
            succ[r] = lv
        elif lv == r and lu != r:
            succ[r] = lu
        else:
            return -1, -1
    for idx in range(s):
        r = reps[idx]
        if terminal[r] >= 0:
            continue
        x = r
        plen = 0
        t = np.int64(-1)
        steps = 0
        while True:
            if terminal[x] >= 0:
                t = terminal[x]
                break
            y = succ[x]
            if succ[y] == x:
                t = x if x < y else y
                terminal[x] = t
                terminal[y] = t
                break
            path[plen] = x
            plen += 1
            x = y
            steps += 1
            if steps > s:
                return -2, -1
        for pi in range(plen):
            terminal[path[pi]] = t
    for idx in range(s):
        # ascending reps: the first to reach a terminal is the minimum
        r = reps[idx]
        t = terminal[r]
        if cluster_min[t] < 0:
            cluster_min[t] = r
    for idx in range(s):
        r = reps[idx]
        final[r] = cluster_min[terminal[r]]
    n_edges = 0
    n_new = 0
    for idx in range(s):
        r = reps[idx]
        y = succ[r]
        if not (succ[y] == r and y < r):
            # a mutual pair picks the same edge twice; the smaller
            # representative keeps it
            out_u[n_edges] = best_u[r]
            out_v[n_edges] = best_v[r]
            out_w[n_edges] = best_w[r]
            n_edges += 1
        if final[r] == r:
            new_reps[n_new] = r
            n_new += 1
    return n_edges, n_new


@njit(parallel=True, cache=True)
def _relabel_kernel(labels, final):
    for i in prange(labels.shape[0]):
        labels[i] = final[labels[i]]


def reduce_labels(bvh: Bvh, state: ComponentState) -> NDArray[np.int64]:
    """Propagate point labels onto internal nodes, MIXED where they clash.

    One parallel pass per tree level, children strictly before
    parents. Updates state.internal_labels in place and returns it.
    """
    if state.labels.shape[0] != bvh.num_points:
        raise DimensionMismatchError("state does not match the hierarchy")
    if bvh.num_points > 1:
        _reduce_labels_kernel(bvh.sweep_order, bvh.sweep_starts,
                              bvh.left, bvh.right, bvh.leaf_perm,
                              state.labels, state.internal_labels)
    return state.internal_labels


def compute_upper_bounds(state: ComponentState, z_order: NDArray[np.int64],
                         points: ArrayLike, metric: Metric) -> NDArray[np.float64]:
    """Seed each component's search radius from Z-order neighbours.

    Every adjacent pair in the sorted order whose endpoints live in
    different components is a genuine outgoing edge for both; its
    weight caps both components' upcoming searches. Components with no
    such pair keep +inf. Updates state.upper_bounds in place and
    returns it.
    """
    pts = as_point_array(points)
    n = pts.shape[0]
    if state.labels.shape[0] != n or z_order.shape[0] != n:
        raise DimensionMismatchError("state, order, and points disagree on size")
    cores = core_array(metric, n)
    state.upper_bounds.fill(np.inf)
    _upper_bounds_kernel(pts, np.ascontiguousarray(z_order, dtype=np.int64),
                         state.labels, cores, state.upper_bounds)
    return state.upper_bounds


def find_component_outgoing_edges(bvh: Bvh, points: ArrayLike, state: ComponentState,
                                  metric: Metric, *, subtree_skip: bool = True,
                                  use_upper_bounds: bool = True) -> OutgoingEdges:
    """Cheapest edge leaving every live component.

    Each point traverses the tree for its nearest foreign point,
    starting from the component's seeded radius; subtrees wholly inside
    the component are skipped when subtree_skip is set. Candidates are
    folded per component under the (weight, u, v) total order.
    """
    pts = as_point_array(points)
    n = pts.shape[0]
    if state.labels.shape[0] != n or pts.shape[1] != bvh.dim or bvh.num_points != n:
        raise DimensionMismatchError("state does not match the hierarchy")
    reps = np.unique(state.labels).astype(np.int64)
    if reps.shape[0] < 2:
        raise NothingToFindError("a single component has no outgoing edges")
    cores = core_array(metric, n)
    cand_u = np.empty(n, dtype=np.int64)
    cand_v = np.empty(n, dtype=np.int64)
    cand_w = np.empty(n, dtype=np.float64)
    nblocks = (n + _FIND_BLOCK - 1) // _FIND_BLOCK
    eval_counts = np.zeros(nblocks, dtype=np.int64)
    overflow = np.zeros(nblocks, dtype=np.uint8)
    _find_edges_kernel(pts, bvh.leaf_perm, bvh.left, bvh.right,
                       bvh.box_lo, bvh.box_hi,
                       state.labels, state.internal_labels,
                       state.upper_bounds, cores,
                       use_upper_bounds, subtree_skip,
                       cand_u, cand_v, cand_w, eval_counts, overflow)
    if overflow.any():
        raise TraversalStackOverflowError(
            f"edge traversal exceeded {STACK_CAPACITY} stacked nodes")
    best_u = np.full(n, -1, dtype=np.int64)
    best_v = np.full(n, -1, dtype=np.int64)
    best_w = np.full(n, np.inf, dtype=np.float64)
    _reduce_candidates_kernel(state.labels, cand_u, cand_v, cand_w,
                              best_u, best_v, best_w)
    missing = reps[best_v[reps] < 0]
    if missing.shape[0] > 0:
        raise NoOutgoingEdgeError(
            f"component {int(missing[0])} found no outgoing edge")
    return OutgoingEdges(reps, best_u, best_v, best_w, int(eval_counts.sum()))


def merge_components(state: ComponentState, outgoing: OutgoingEdges) -> MergeOutcome:
    """Collapse the chosen-edge graph and append its edges to the tree.

    Chains of component successors end in a mutual pair; every
    component on a chain adopts the smallest representative of its
    merged cluster, each chosen edge is kept once (a mutual pair picks
    the same edge twice), and point labels are rewritten in place.
    """
    reps = np.ascontiguousarray(outgoing.reps, dtype=np.int64)
    n = state.labels.shape[0]
    s = reps.shape[0]
    succ = np.empty(n, dtype=np.int64)
    terminal = np.empty(n, dtype=np.int64)
    cluster_min = np.empty(n, dtype=np.int64)
    final = np.empty(n, dtype=np.int64)
    out_u = np.empty(s, dtype=np.int64)
    out_v = np.empty(s, dtype=np.int64)
    out_w = np.empty(s, dtype=np.float64)
    new_reps = np.empty(s, dtype=np.int64)
    n_edges, n_new = _merge_kernel(reps, outgoing.u, outgoing.v, outgoing.w,
                                   state.labels, succ, terminal, cluster_min,
                                   final, out_u, out_v, out_w, new_reps)
    if n_edges == -1:
        raise InternalInvariantViolation("a component's chosen edge is inconsistent")
    if n_edges == -2:
        raise InternalInvariantViolation("component chain did not terminate in a pair")
    if n_new >= s:
        raise InternalInvariantViolation("merge did not reduce the component count")
    _relabel_kernel(state.labels, final)
    return MergeOutcome(int(n_new), out_u[:n_edges].copy(), out_v[:n_edges].copy(),
                        out_w[:n_edges].copy(), new_reps[:n_new].copy())


def _resolve_threads(threads: int) -> int:
    if not isinstance(threads, (int, np.integer)):
        raise InvalidParameterError(f"threads must be an integer, got {threads!r}")
    limit = numba.config.NUMBA_NUM_THREADS
    t = int(threads)
    if t < 0:
        raise InvalidParameterError(f"threads must be >= 0, got {t}")
    if t == 0:
        return limit
    return min(t, limit)


def _resolve_metric(metric, k_pts: int) -> tuple[str, CoreDistances | None]:
    if isinstance(metric, str):
        name = metric.strip().lower().replace("_", "-")
        if name == "euclidean":
            return "euclidean", None
        if name in ("mrd", "mutual-reachability"):
            return "mrd", None
        raise InvalidParameterError(
            f"metric must be 'euclidean' or 'mrd', got {metric!r}")
    if isinstance(metric, Euclidean):
        return "euclidean", None
    if isinstance(metric, MutualReachability):
        return "mrd", metric.core
    raise InvalidParameterError(f"unknown metric {metric!r}")


def boruvka_emst(points: ArrayLike, metric="euclidean", k_pts: int = 1, *,
                 threads: int = 0, subtree_skip: bool = True,
                 upper_bound_seeding: bool = True) -> MstResult:
    """Minimum spanning tree of a point set.

    Parameters
    ----------
    points : array_like
        (n, d) coordinates, d in {2, 3}; stored as float32.
    metric : str or Euclidean or MutualReachability
        "euclidean" (default) or "mrd"; a MutualReachability instance
        supplies precomputed core distances.
    k_pts : int
        Core-distance neighbour count for "mrd" (self included);
        must be 1 for the Euclidean metric. k_pts = 1 reproduces the
        Euclidean result bit for bit.
    threads : int
        Worker threads; 0 means all available. Requests are clamped
        to the runtime's limit. Output is independent of this value.
    subtree_skip : bool
        Skip subtrees wholly inside the querying component.
    upper_bound_seeding : bool
        Seed search radii from Z-order neighbour pairs.

    Returns
    -------
    MstResult
        n - 1 edges sorted by (weight, u, v), with per-phase timings
        and traversal instrumentation. Edge weights are exact float64
        values; the optimization flags change work done, never output.
    """
    if not isinstance(k_pts, (int, np.integer)) or isinstance(k_pts, bool):
        raise InvalidParameterError(f"k_pts must be an integer, got {k_pts!r}")
    k_pts = int(k_pts)
    if k_pts < 1:
        raise InvalidParameterError(f"k_pts must be >= 1, got {k_pts}")
    kind, given_core = _resolve_metric(metric, k_pts)
    if kind == "euclidean" and k_pts != 1:
        raise InvalidParameterError("k_pts applies to the mrd metric only")
    nthreads = _resolve_threads(threads)
    prev_threads = numba.get_num_threads()
    numba.set_num_threads(nthreads)
    try:
        return _run_boruvka(points, kind, given_core, k_pts, nthreads,
                            bool(subtree_skip), bool(upper_bound_seeding))
    finally:
        numba.set_num_threads(prev_threads)


def _run_boruvka(points, kind, given_core, k_pts, nthreads,
                 subtree_skip, upper_bound_seeding) -> MstResult:
    t_start = time.perf_counter()

    t0 = t_start
    pts = as_point_array(points)
    n = pts.shape[0]
    tree = build(pts)
    t_tree = time.perf_counter() - t0

    t0 = time.perf_counter()
    if kind == "mrd":
        if given_core is not None:
            cores = core_array(MutualReachability(given_core), n)
        else:
            cores = compute_core_distances(tree, pts, k_pts).values
    else:
        cores = np.zeros(n, dtype=np.float64)
    t_core = time.perf_counter() - t0

    t0 = time.perf_counter()
    labels = np.arange(n, dtype=np.int64)
    internal_labels = np.full(max(n - 1, 0), MIXED, dtype=np.int64)
    ubounds = np.full(n, np.inf, dtype=np.float64)
    reps = np.arange(n, dtype=np.int64)

    cand_u = np.empty(n, dtype=np.int64)
    cand_v = np.empty(n, dtype=np.int64)
    cand_w = np.empty(n, dtype=np.float64)
    best_u = np.empty(n, dtype=np.int64)
    best_v = np.empty(n, dtype=np.int64)
    best_w = np.empty(n, dtype=np.float64)
    succ = np.empty(n, dtype=np.int64)
    terminal = np.empty(n, dtype=np.int64)
    cluster_min = np.empty(n, dtype=np.int64)
    final = np.empty(n, dtype=np.int64)
    out_u = np.empty(n, dtype=np.int64)
    out_v = np.empty(n, dtype=np.int64)
    out_w = np.empty(n, dtype=np.float64)
    new_reps = np.empty(n, dtype=np.int64)
    nblocks = (n + _FIND_BLOCK - 1) // _FIND_BLOCK
    eval_counts = np.zeros(nblocks, dtype=np.int64)
    overflow = np.zeros(nblocks, dtype=np.uint8)

    max_iters = max(1, math.ceil(math.log2(n))) if n > 1 else 0
    component_counts = [n]
    parts_u: list[NDArray[np.int64]] = []
    parts_v: list[NDArray[np.int64]] = []
    parts_w: list[NDArray[np.float64]] = []
    iterations = 0
    total_evals = 0
    t_reduce = t_bounds = t_find = t_merge = 0.0

    while reps.shape[0] > 1:
        iterations += 1
        if iterations > max_iters:
            raise InternalInvariantViolation(
                f"exceeded the {max_iters}-iteration bound for n={n}")

        if subtree_skip:
            t1 = time.perf_counter()
            _reduce_labels_kernel(tree.sweep_order, tree.sweep_starts,
                                  tree.left, tree.right, tree.leaf_perm,
                                  labels, internal_labels)
            t_reduce += time.perf_counter() - t1

        if upper_bound_seeding:
            t1 = time.perf_counter()
            ubounds[reps] = np.inf
            _upper_bounds_kernel(pts, tree.leaf_perm, labels, cores, ubounds)
            t_bounds += time.perf_counter() - t1

        t1 = time.perf_counter()
        overflow[:] = 0
        _find_edges_kernel(pts, tree.leaf_perm, tree.left, tree.right,
                           tree.box_lo, tree.box_hi, labels, internal_labels,
                           ubounds, cores, upper_bound_seeding, subtree_skip,
                           cand_u, cand_v, cand_w, eval_counts, overflow)
        if overflow.any():
            raise TraversalStackOverflowError(
                f"edge traversal exceeded {STACK_CAPACITY} stacked nodes")
        total_evals += int(eval_counts.sum())
        best_u[reps] = -1
        best_v[reps] = -1
        best_w[reps] = np.inf
        _reduce_candidates_kernel(labels, cand_u, cand_v, cand_w,
                                  best_u, best_v, best_w)
        t_find += time.perf_counter() - t1

        t1 = time.perf_counter()
        n_edges, n_new = _merge_kernel(reps, best_u, best_v, best_w, labels,
                                       succ, terminal, cluster_min, final,
                                       out_u, out_v, out_w, new_reps)
        if n_edges == -1:
            raise InternalInvariantViolation("a component found no valid outgoing edge")
        if n_edges == -2:
            raise InternalInvariantViolation("component chain did not terminate in a pair")
        if n_new >= reps.shape[0]:
            raise InternalInvariantViolation("merge did not reduce the component count")
        _relabel_kernel(labels, final)
        parts_u.append(out_u[:n_edges].copy())
        parts_v.append(out_v[:n_edges].copy())
        parts_w.append(out_w[:n_edges].copy())
        reps = new_reps[:n_new].copy()
        component_counts.append(int(n_new))
        t_merge += time.perf_counter() - t1

    if parts_u:
        eu = np.concatenate(parts_u)
        ev = np.concatenate(parts_v)
        ew = np.concatenate(parts_w)
    else:
        eu = np.empty(0, dtype=np.int64)
        ev = np.empty(0, dtype=np.int64)
        ew = np.empty(0, dtype=np.float64)
    if eu.shape[0] != n - 1:
        raise InternalInvariantViolation(
            f"collected {eu.shape[0]} edges for {n} points")
    order = np.lexsort((ev, eu, ew))
    edges = np.stack([eu[order], ev[order]], axis=1).astype(np.int64)
    weights = ew[order]
    t_mst = time.perf_counter() - t0
    total = time.perf_counter() - t_start

    return MstResult(
        edges=edges,
        weights=weights,
        total_weight=float(np.sum(weights)),
        iterations=iterations,
        phase_timings={
            "tree": t_tree,
            "core": t_core,
            "reduce_labels": t_reduce,
            "upper_bounds": t_bounds,
            "find_edges": t_find,
            "merge": t_merge,
            "mst": t_mst,
            "total": total,
        },
        component_counts=component_counts,
        leaf_distance_evals=total_evals,
        threads=nthreads,
    )
