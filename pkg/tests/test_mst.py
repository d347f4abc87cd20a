import math

import numpy as np
import pytest

from emst import (
    MIXED,
    ComponentState,
    CoreDistances,
    Euclidean,
    InternalInvariantViolation,
    InvalidParameterError,
    MutualReachability,
    NothingToFindError,
    OutgoingEdges,
    WeightedEdge,
    boruvka_emst,
    brute_bichromatic_min,
    brute_core_distances,
    build,
    compute_upper_bounds,
    find_component_outgoing_edges,
    kruskal_mst,
    merge_components,
    prim_mst,
    reduce_labels,
)
from emst.bvh import Bvh, _level_schedule, _node_heights


def _points(n, d, seed, kind="uniform"):
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        return (rng.random((n, d)) - 0.5).astype(np.float32)
    return rng.standard_normal((n, d)).astype(np.float32)


def _handmade_tree():
    # eight leaves under seven internal nodes:
    #            0
    #        3       4
    #      1   2   5  [4]
    #                6   [7]
    #              [5][6]
    # ([s] marks leaf slots; leaf_perm is the identity)
    n, m = 8, 7
    left = np.int64([3, m + 0, m + 2, 1, 5, 6, m + 5])
    right = np.int64([4, m + 1, m + 3, 2, m + 4, m + 7, m + 6])
    parent = np.int64([-1, 3, 3, 0, 0, 4, 5])
    leaf_parent = np.int64([1, 1, 2, 2, 4, 6, 6, 5])
    heights, processed = _node_heights(left, right, parent)
    assert processed == m
    order, starts = _level_schedule(heights)
    return Bvh(n, 2, np.arange(n, dtype=np.int64), left, right, parent,
               leaf_parent, np.zeros((m, 2), np.float32),
               np.zeros((m, 2), np.float32), order, starts)


def test_label_reduction_on_handmade_tree():
    tree = _handmade_tree()
    state = ComponentState.initial(tree)
    # components: {0,1,2,3} -> 0, {4,7} -> 4, {5,6} -> 5
    state.labels[:] = [0, 0, 0, 0, 4, 5, 5, 4]
    got = reduce_labels(tree, state)
    assert np.array_equal(got, [MIXED, 0, 0, 0, MIXED, MIXED, 5])


def test_label_reduction_matches_recursive_oracle():
    pts = _points(200, 2, 0)
    tree = build(pts)
    m = tree.num_internal
    rng = np.random.default_rng(1)
    for _ in range(5):
        labels = rng.integers(0, 7, 200).astype(np.int64)
        state = ComponentState(labels, np.full(m, MIXED, np.int64),
                               np.full(200, np.inf))
        got = reduce_labels(tree, state)

        def subtree_label(ref):
            if ref >= m:
                return int(labels[tree.leaf_perm[ref - m]])
            a = subtree_label(int(tree.left[ref]))
            b = subtree_label(int(tree.right[ref]))
            return a if a == b else MIXED

        want = np.array([subtree_label(v) for v in range(m)])
        assert np.array_equal(got, want)


def test_label_reduction_all_singletons_is_all_mixed():
    pts = _points(100, 2, 2)
    tree = build(pts)
    state = ComponentState.initial(tree)
    got = reduce_labels(tree, state)
    assert np.all(got == MIXED)


def test_label_reduction_single_component_is_uniform():
    pts = _points(50, 3, 3)
    tree = build(pts)
    state = ComponentState.initial(tree)
    state.labels[:] = 0
    assert np.all(reduce_labels(tree, state) == 0)


def test_upper_bounds_cover_adjacent_pairs():
    pts = _points(300, 2, 4)
    tree = build(pts)
    state = ComponentState.initial(tree)
    bounds = compute_upper_bounds(state, tree.leaf_perm, pts, Euclidean())
    # every singleton touches at least one Z-order neighbour
    assert np.all(np.isfinite(bounds))
    # recompute the fold directly
    want = np.full(300, np.inf)
    order = tree.leaf_perm
    a64 = pts.astype(np.float64)
    for s in range(299):
        a, b = int(order[s]), int(order[s + 1])
        dx = a64[a, 0] - a64[b, 0]
        dy = a64[a, 1] - a64[b, 1]
        w = math.sqrt(dx * dx + dy * dy)
        want[a] = min(want[a], w)
        want[b] = min(want[b], w)
    assert np.array_equal(bounds, want)


def test_upper_bounds_are_admissible():
    # a seeded radius must never undercut the component's true best edge
    pts = _points(120, 2, 5)
    tree = build(pts)
    rng = np.random.default_rng(6)
    labels = rng.integers(0, 3, 120).astype(np.int64)
    # relabel to representatives: smallest member index per group
    for g in range(3):
        members = np.flatnonzero(labels == g)
        labels[members] = members.min()
    state = ComponentState(labels.copy(), np.full(119, MIXED, np.int64),
                           np.full(120, np.inf))
    bounds = compute_upper_bounds(state, tree.leaf_perm, pts, Euclidean())
    for rep in np.unique(labels):
        _, _, w = brute_bichromatic_min(pts, labels, int(rep))
        assert bounds[rep] >= w


def test_upper_bounds_single_component_stays_infinite():
    pts = _points(40, 2, 7)
    tree = build(pts)
    state = ComponentState.initial(tree)
    state.labels[:] = 0
    bounds = compute_upper_bounds(state, tree.leaf_perm, pts, Euclidean())
    assert np.all(np.isinf(bounds[0:1]))


def test_find_edges_two_points():
    pts = np.float32([[0.0, 0.0], [3.0, 4.0]])
    tree = build(pts)
    state = ComponentState.initial(tree)
    reduce_labels(tree, state)
    compute_upper_bounds(state, tree.leaf_perm, pts, Euclidean())
    out = find_component_outgoing_edges(tree, pts, state, Euclidean())
    assert out.edge(0) == WeightedEdge(0, 1, 5.0)
    assert out.edge(1) == WeightedEdge(0, 1, 5.0)


def test_find_edges_collinear_ties():
    # middle points tie between both neighbours; the total order picks
    # the smaller endpoint pair
    pts = np.float32([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
    tree = build(pts)
    state = ComponentState.initial(tree)
    reduce_labels(tree, state)
    compute_upper_bounds(state, tree.leaf_perm, pts, Euclidean())
    out = find_component_outgoing_edges(tree, pts, state, Euclidean())
    assert out.edge(0) == WeightedEdge(0, 1, 1.0)
    assert out.edge(1) == WeightedEdge(0, 1, 1.0)
    assert out.edge(2) == WeightedEdge(1, 2, 1.0)
    assert out.edge(3) == WeightedEdge(2, 3, 1.0)


def _mid_run_state(pts, metric, iterations=1):
    tree = build(pts)
    state = ComponentState.initial(tree)
    for _ in range(iterations):
        reduce_labels(tree, state)
        compute_upper_bounds(state, tree.leaf_perm, pts, metric)
        out = find_component_outgoing_edges(tree, pts, state, metric)
        merge_components(state, out)
    return tree, state


@pytest.mark.parametrize("metric_kind", ["euclidean", "mrd"])
@pytest.mark.parametrize("iterations", [1, 2])
def test_find_edges_match_bichromatic_oracle_mid_run(metric_kind, iterations):
    pts = _points(150, 2, 8, kind="normal")
    if metric_kind == "mrd":
        metric = MutualReachability(CoreDistances(4, brute_core_distances(pts, 4)))
    else:
        metric = Euclidean()
    tree, state = _mid_run_state(pts, metric, iterations)
    reduce_labels(tree, state)
    compute_upper_bounds(state, tree.leaf_perm, pts, metric)
    out = find_component_outgoing_edges(tree, pts, state, metric)
    for rep in out.reps:
        u, v, w = brute_bichromatic_min(pts, state.labels, int(rep), metric)
        assert out.edge(int(rep)) == WeightedEdge(u, v, w)


def test_find_edges_flags_do_not_change_results():
    pts = _points(200, 3, 9)
    metric = Euclidean()
    tree, state = _mid_run_state(pts, metric)
    reduce_labels(tree, state)
    compute_upper_bounds(state, tree.leaf_perm, pts, metric)
    base = find_component_outgoing_edges(tree, pts, state, metric)
    for skip, bound in [(False, True), (True, False), (False, False)]:
        other = find_component_outgoing_edges(
            tree, pts, state, metric, subtree_skip=skip, use_upper_bounds=bound)
        assert np.array_equal(base.u[base.reps], other.u[other.reps])
        assert np.array_equal(base.v[base.reps], other.v[other.reps])
        assert np.array_equal(base.w[base.reps], other.w[other.reps])


def test_find_edges_requires_two_components():
    pts = _points(10, 2, 10)
    tree = build(pts)
    state = ComponentState.initial(tree)
    state.labels[:] = 0
    with pytest.raises(NothingToFindError):
        find_component_outgoing_edges(tree, pts, state, Euclidean())


def test_merge_mutual_pair():
    pts = np.float32([[0.0, 0.0], [1.0, 0.0]])
    tree = build(pts)
    state = ComponentState.initial(tree)
    out = OutgoingEdges(
        reps=np.int64([0, 1]),
        u=np.int64([0, 0]), v=np.int64([1, 1]), w=np.float64([1.0, 1.0]),
        leaf_distance_evals=0)
    res = merge_components(state, out)
    assert res.num_components == 1
    assert res.edges == [WeightedEdge(0, 1, 1.0)]
    assert np.array_equal(state.labels, [0, 0])
    assert np.array_equal(res.new_reps, [0])


def test_merge_chain_collapses_to_smallest_representative():
    # 0 -> 1, 1 <-> 2: one cluster, one edge per component with the
    # mutual pair's duplicate dropped
    pts = np.float32([[0.0, 0.0], [1.0, 0.0], [1.5, 0.0]])
    tree = build(pts)
    state = ComponentState.initial(tree)
    out = OutgoingEdges(
        reps=np.int64([0, 1, 2]),
        u=np.int64([0, 1, 1]),
        v=np.int64([1, 2, 2]),
        w=np.float64([1.0, 0.5, 0.5]),
        leaf_distance_evals=0)
    res = merge_components(state, out)
    assert res.num_components == 1
    assert res.edges == [WeightedEdge(0, 1, 1.0), WeightedEdge(1, 2, 0.5)]
    assert np.array_equal(state.labels, [0, 0, 0])


def test_merge_labels_become_component_minima():
    pts = _points(256, 2, 11)
    tree = build(pts)
    state = ComponentState.initial(tree)
    taken: list[WeightedEdge] = []
    while len(np.unique(state.labels)) > 1:
        reduce_labels(tree, state)
        compute_upper_bounds(state, tree.leaf_perm, pts, Euclidean())
        out = find_component_outgoing_edges(tree, pts, state, Euclidean())
        res = merge_components(state, out)
        taken.extend(res.edges)

        # union-find reference over everything taken so far
        parent = list(range(256))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in taken:
            ra, rb = find(e.u), find(e.v)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        want = np.array([min(j for j in range(256) if find(j) == find(i))
                         for i in range(256)])
        assert np.array_equal(state.labels, want)
        assert np.array_equal(res.new_reps, np.unique(want))
    assert len(taken) == 255


def test_merge_rejects_broken_candidates():
    pts = np.float32([[0.0, 0.0], [1.0, 0.0]])
    tree = build(pts)
    state = ComponentState.initial(tree)
    out = OutgoingEdges(reps=np.int64([0, 1]),
                        u=np.int64([-1, 0]), v=np.int64([-1, 1]),
                        w=np.float64([np.inf, 1.0]), leaf_distance_evals=0)
    with pytest.raises(InternalInvariantViolation):
        merge_components(state, out)


def test_weighted_edge_canonical_form():
    e = WeightedEdge(5, 2, 1.5)
    assert (e.u, e.v) == (2, 5)
    assert WeightedEdge(2, 5, 1.5) == e
    assert WeightedEdge(1, 2, 1.0) < WeightedEdge(1, 3, 1.0) < WeightedEdge(0, 1, 2.0)
    with pytest.raises(InvalidParameterError):
        WeightedEdge(3, 3, 0.0)


def test_component_state_initial_shape():
    tree = build(_points(9, 2, 12))
    state = ComponentState.initial(tree)
    assert np.array_equal(state.labels, np.arange(9))
    assert np.all(state.internal_labels == MIXED)
    assert np.all(np.isinf(state.upper_bounds))
    assert state.num_components == 9


@pytest.mark.parametrize("n,d,kind,seed", [
    (2, 2, "uniform", 0), (10, 3, "normal", 1), (333, 2, "uniform", 2),
    (1000, 3, "normal", 3), (1024, 2, "uniform", 4),
])
def test_engine_matches_reference_trees(n, d, kind, seed):
    pts = _points(n, d, seed, kind)
    res = boruvka_emst(pts)
    want = prim_mst(pts)
    assert np.array_equal(res.edges, want.edges)
    assert np.array_equal(res.weights, want.weights)
    if n <= 400:
        alt = kruskal_mst(pts)
        assert np.array_equal(res.edges, alt.edges)


def test_engine_matches_reference_under_mutual_reachability():
    pts = _points(400, 2, 5, "normal")
    for k in (2, 4, 16):
        res = boruvka_emst(pts, metric="mrd", k_pts=k)
        metric = MutualReachability(CoreDistances(k, brute_core_distances(pts, k)))
        want = prim_mst(pts, metric)
        assert np.array_equal(res.edges, want.edges)
        assert np.array_equal(res.weights, want.weights)


def test_engine_accepts_precomputed_cores():
    pts = _points(100, 2, 6)
    cores = CoreDistances(4, brute_core_distances(pts, 4))
    a = boruvka_emst(pts, metric=MutualReachability(cores), k_pts=4)
    b = boruvka_emst(pts, metric="mrd", k_pts=4)
    assert np.array_equal(a.edges, b.edges)
    assert np.array_equal(a.weights, b.weights)


def test_engine_iteration_bound_and_monotone_components():
    for n, seed in [(2, 0), (10, 1), (100, 2), (1000, 3), (4096, 4)]:
        pts = _points(n, 2, seed)
        res = boruvka_emst(pts)
        assert res.iterations <= max(1, math.ceil(math.log2(n)))
        counts = res.component_counts
        assert counts[0] == n and counts[-1] == 1
        assert all(a > b for a, b in zip(counts, counts[1:]))


def test_engine_single_point():
    res = boruvka_emst(np.float32([[4.0, 5.0]]))
    assert res.edges.shape == (0, 2)
    assert res.weights.shape == (0,)
    assert res.total_weight == 0.0
    assert res.iterations == 0


def test_engine_coincident_points():
    res = boruvka_emst(np.zeros((50, 3), dtype=np.float32))
    assert res.edges.shape == (49, 2)
    assert np.all(res.weights == 0.0)
    assert res.iterations <= math.ceil(math.log2(50))
    # forms a tree: union-find check
    parent = list(range(50))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for u, v in res.edges:
        ru, rv = find(int(u)), find(int(v))
        assert ru != rv
        parent[rv] = ru


def test_engine_optimizations_change_work_not_output():
    pts = _points(800, 2, 7, "normal")
    base = boruvka_emst(pts)
    variants = [
        boruvka_emst(pts, subtree_skip=False),
        boruvka_emst(pts, upper_bound_seeding=False),
        boruvka_emst(pts, subtree_skip=False, upper_bound_seeding=False),
    ]
    for v in variants:
        assert np.array_equal(base.edges, v.edges)
        assert np.array_equal(base.weights, v.weights)
    assert base.leaf_distance_evals < variants[2].leaf_distance_evals


def test_engine_thread_parameter_does_not_change_output():
    pts = _points(3000, 2, 8)
    runs = [boruvka_emst(pts, threads=t) for t in (0, 1, 2, 8)]
    for r in runs[1:]:
        assert np.array_equal(runs[0].edges, r.edges)
        assert np.array_equal(runs[0].weights, r.weights)
    assert all(r.threads >= 1 for r in runs)


def test_engine_parameter_validation():
    pts = _points(10, 2, 9)
    with pytest.raises(InvalidParameterError):
        boruvka_emst(pts, metric="chebyshev")
    with pytest.raises(InvalidParameterError):
        boruvka_emst(pts, metric="euclidean", k_pts=3)
    with pytest.raises(InvalidParameterError):
        boruvka_emst(pts, metric="mrd", k_pts=0)
    with pytest.raises(InvalidParameterError):
        boruvka_emst(pts, metric="mrd", k_pts=11)
    with pytest.raises(InvalidParameterError):
        boruvka_emst(pts, threads=-1)


def test_engine_reports_instrumentation():
    pts = _points(2000, 2, 10)
    res = boruvka_emst(pts, metric="mrd", k_pts=4)
    t = res.phase_timings
    for key in ("tree", "core", "reduce_labels", "upper_bounds",
                "find_edges", "merge", "mst", "total"):
        assert key in t and t[key] >= 0.0
    assert t["core"] > 0.0
    assert t["tree"] + t["core"] + t["mst"] <= t["total"] * 1.01
    assert res.leaf_distance_evals > 0
    assert res.edges.shape == (1999, 2)
    keys = [WeightedEdge(int(u), int(v), float(w)).key
            for (u, v), w in zip(res.edges, res.weights)]
    assert keys == sorted(keys)
    assert res.total_weight == pytest.approx(float(res.weights.sum()))
