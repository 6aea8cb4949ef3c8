"""Communication building blocks: probe, BFS tree, convergecast, broadcast."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distparam import graphs, primitives as P
from distparam.engine import BandwidthExceeded, Model, id_width, run

SETTINGS = settings(max_examples=40, deadline=None)

random_graph = st.builds(
    lambda n, seed: graphs.make_random_connected(n, 0.4, seed=seed),
    st.integers(2, 9), st.integers(0, 200))


def wrap(gen_fn, *args, **kwargs):
    def prog(ctx):
        result = yield from gen_fn(ctx, *args, **kwargs)
        return result
    return prog


def tree_program(body, diam_bound):
    """Build the BFS tree, then run `body(ctx, tree)` and return its result."""
    def prog(ctx):
        tree = yield from P.leader_and_bfs(ctx, diam_bound)
        result = yield from body(ctx, tree)
        return result
    return prog


def test_exchange_round_trip():
    res = run(graphs.make_path(3), wrap(P.exchange, 7, field_width=4))
    assert res.rounds == 1
    assert res.outputs[1] == {0: (7,), 2: (7,)}


@given(random_graph, st.integers(1, 9))
@SETTINGS
def test_diameter_probe_duration_and_contract(g, k):
    res = run(g, wrap(P.diameter_probe, k))
    assert res.rounds == 3 * k + 1
    verdicts = set(res.outputs.values())
    assert len(verdicts) == 1
    diam = g.diameter()
    if diam <= k:
        assert verdicts == {P.DiameterVerdict.SMALL}
    elif diam >= 2 * k + 1:
        assert verdicts == {P.DiameterVerdict.LARGE}


@given(random_graph)
@SETTINGS
def test_leader_and_bfs_builds_a_consistent_tree(g):
    d = g.diameter()
    res = run(g, wrap(P.leader_and_bfs, max(d, 1)))
    assert res.rounds == 2 * max(d, 1) + 2
    trees = res.outputs
    root = min(g.nodes)
    dist = g.bfs_distances(root)
    for v, t in trees.items():
        assert t.root == root
        assert t.depth == dist[v]
        if v == root:
            assert t.parent is None
        else:
            assert t.parent in g.neighbors(v)
            assert trees[t.parent].depth == t.depth - 1
            assert v in trees[t.parent].children


def test_record_capacity_local_is_unbounded():
    def body(ctx, tree):
        return P.record_capacity(ctx, 1000)
        yield  # never reached; makes body a generator

    res = run(graphs.make_path(2), tree_program(body, 1), model=Model.LOCAL)
    assert set(res.outputs.values()) == {None}


def test_record_capacity_raises_when_nothing_fits():
    def body(ctx, tree):
        return P.record_capacity(ctx, 1000)
        yield

    with pytest.raises(BandwidthExceeded):
        run(graphs.make_path(2), tree_program(body, 1), model=Model.CONGEST)


def test_upcast_duration_formula():
    assert P.upcast_duration(3, 10, None) == 5
    assert P.upcast_duration(3, 10, 2) == 3 + 5 + 1
    assert P.upcast_duration(3, 0, 2) == 3 + 1 + 1


@given(random_graph)
@SETTINGS
def test_pipelined_upcast_collects_everything_at_root(g):
    d = max(g.diameter(), 1)

    def body(ctx, tree):
        recs = [(ctx.node_id, u) for u in ctx.neighbors if u > ctx.node_id]
        cap = P.record_capacity(ctx, 2 * id_width(ctx.n))
        dur = P.upcast_duration(d, g.m, cap)
        got = yield from P.pipelined_upcast(ctx, tree, recs, 2, dur)
        return got

    res = run(g, tree_program(body, d))
    root = min(g.nodes)
    assert res.outputs[root] == sorted(g.edges)
    assert all(v == root or out == [] for v, out in res.outputs.items())


@given(random_graph, st.integers(1, 5))
@SETTINGS
def test_bounded_upcast_min_returns_t_smallest(g, t):
    d = max(g.diameter(), 1)

    def body(ctx, tree):
        recs = [(ctx.node_id,)]
        got = yield from P.bounded_upcast_min(ctx, tree, recs, 1, t, d + t + 1)
        return got

    res = run(g, tree_program(body, d))
    root = min(g.nodes)
    assert res.outputs[root] == [(v,) for v in sorted(g.nodes)[:t]]


@given(random_graph)
@SETTINGS
def test_broadcast_reaches_every_node(g):
    d = max(g.diameter(), 1)
    payload = [(1,), (2,), (3,)]

    def body(ctx, tree):
        recs = payload if tree.is_root else []
        cap = P.record_capacity(ctx, id_width(ctx.n))
        dur = P.upcast_duration(d, len(payload), cap)
        got = yield from P.broadcast_records(ctx, tree, recs, 1, dur)
        return got

    res = run(g, tree_program(body, d))
    assert all(out == payload for out in res.outputs.values())


@given(random_graph, st.integers(0, 10))
@SETTINGS
def test_threshold_count_is_exact_up_to_threshold(g, threshold):
    d = max(g.diameter(), 1)

    def body(ctx, tree):
        got = yield from P.threshold_count(ctx, tree, ctx.node_id % 3, threshold,
                                           bit=1 if ctx.node_id == 0 else 0)
        return got

    res = run(g, tree_program(body, d))
    true_total = sum(v % 3 for v in g.nodes)
    total, exceeded, orbit = res.outputs[min(g.nodes)]
    assert set(res.outputs.values()) == {(total, exceeded, orbit)}
    assert exceeded == (true_total > threshold)
    if not exceeded:
        assert total == true_total
    assert orbit == 1


def test_threshold_count_duration():
    g = graphs.make_path(5)
    d = g.diameter()

    def body(ctx, tree):
        got = yield from P.threshold_count(ctx, tree, 1, 10)
        return got

    res = run(g, tree_program(body, d))
    assert res.rounds == (2 * d + 2) + (2 * d + 2)


def test_owned_edge_records_partition_the_edges():
    g = graphs.make_cycle(5)

    def prog(ctx):
        return P.owned_edge_records(ctx)
        yield

    res = run(g, prog)
    owned = [e for recs in res.outputs.values() for e in recs]
    assert sorted(tuple(sorted(e)) for e in owned) == sorted(g.edges)
    assert len(owned) == len(set(owned))


@given(random_graph)
@SETTINGS
def test_collect_graph_reconstructs_the_graph(g):
    d = max(g.diameter(), 1)

    def body(ctx, tree):
        cap = P.record_capacity(ctx, 2 * id_width(ctx.n))
        got = yield from P.collect_graph(
            ctx, tree, P.upcast_duration(d, g.m, cap))
        return got

    res = run(g, tree_program(body, d))
    rebuilt = res.outputs[min(g.nodes)]
    assert rebuilt.nodes == g.nodes
    assert rebuilt.edges == g.edges
