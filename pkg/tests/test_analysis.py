# -*- coding: utf-8 -*-
import networkx as nx
import numpy as np
import pytest

from zidlab_pkg.errors import (
    EmptyGraph, NoWinningWalk, InsufficientTraces, ValidationError,
)
from zidlab_pkg.mdpgraph import (
    Edge, InducedGraph, enumerate_graph, min_cut_ssb, all_min_cuts, edge_record,
    classify_incentive, has_winning_walk, reward_density_exact, is_sparse,
    ZERO_INCENTIVE, DELAYED_INCENTIVE, IMMEDIATE_INCENTIVE,
)
from zidlab_pkg.rollout import TraceStep, random_traces
from zidlab_pkg.shaping import ShapingConfig


def _graph(n, arcs, initial=(0,), goals=None, weights=None):
    goals = {n - 1} if goals is None else set(goals)
    weights = weights or {}
    edges = tuple(Edge(u, f"a{i}", v, weights.get(i, 0.0)) for i, (u, v) in enumerate(arcs))
    return InducedGraph(tuple(f"v{i}" for i in range(n)), edges,
                        frozenset(initial), frozenset(goals))


def _random_graph(seed, n=8, p=0.3):
    rng = np.random.default_rng(seed)
    arcs = [(u, v) for u in range(n - 1) for v in range(n) if u != v and rng.random() < p]
    arcs += [(u, u + 1) for u in range(n - 1) if rng.random() < 0.5]
    return _graph(n, arcs)


def test_empty_graph_density():
    with pytest.raises(EmptyGraph):
        reward_density_exact(_graph(2, []))


def test_sparsity_threshold_range(chain):
    with pytest.raises(ValidationError):
        is_sparse(enumerate_graph(chain), threshold=1.5)


def test_bridge_is_the_cut():
    # two triangles, both ways round, joined by one edge
    left = [(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]
    right = [(3, 4), (4, 3), (4, 5), (5, 4), (3, 5), (5, 3)]
    g = _graph(6, left + [(2, 3)] + right)
    cut = min_cut_ssb(g)
    assert cut.cut_edges == (6,)
    assert cut.is_zid
    assert cut.source_side == {0, 1, 2}


def test_rewarded_cut_is_not_zid():
    g = _graph(3, [(0, 1), (0, 1), (1, 2)], weights={2: 1.0})
    cut = min_cut_ssb(g)
    assert cut.cut_size == 1
    assert not cut.is_zid
    assert cut.max_cut_weight == 1.0


def test_parallel_edges_count_separately():
    g = _graph(3, [(0, 1), (0, 1), (1, 2), (1, 2), (1, 2)])
    assert min_cut_ssb(g).cut_size == 2


def test_no_winning_walk():
    g = _graph(3, [(0, 1), (2, 1)])
    assert not has_winning_walk(g)
    with pytest.raises(NoWinningWalk):
        min_cut_ssb(g)


@pytest.mark.parametrize("seed", range(12))
def test_canonical_cut_is_minimum(seed):
    g = _random_graph(seed)
    if not has_winning_walk(g):
        pytest.skip("no walk in this draw")
    cut = min_cut_ssb(g)
    cuts = all_min_cuts(g)
    assert {c.cut_size for c in cuts} == {cut.cut_size}
    assert cut.cut_edges in {c.cut_edges for c in cuts}
    # agrees with networkx on the same unit-capacity network
    net = nx.DiGraph()
    for e in g.edges:
        cap = net.get_edge_data(e.src, e.dst, {"capacity": 0})["capacity"]
        net.add_edge(e.src, e.dst, capacity=cap + 1)
    assert cut.cut_size == nx.maximum_flow_value(net, 0, g.n_vertices - 1)


def test_removing_the_cut_disconnects():
    g = _random_graph(3, n=10, p=0.35)
    if not has_winning_walk(g):
        pytest.skip("no walk in this draw")
    cut = min_cut_ssb(g)
    assert not has_winning_walk(g, skip_edges=cut.cut_edges)


def test_exhaustive_budget():
    g = _graph(20, [(i, i + 1) for i in range(19)])
    with pytest.raises(ValidationError):
        all_min_cuts(g)


def test_two_lasers_is_zid(two_lasers):
    g = enumerate_graph(two_lasers)
    cut = min_cut_ssb(g)
    assert cut.is_zid
    assert cut.max_cut_weight <= g.base_reward
    assert classify_incentive(g, cut).kind == ZERO_INCENTIVE


def test_rewarded_lasers_is_not_zid(rewarded_lasers):
    g = enumerate_graph(rewarded_lasers)
    cut = min_cut_ssb(g)
    assert cut.cut_size == 1
    assert not cut.is_zid
    report = classify_incentive(g, cut)
    assert report.kind == IMMEDIATE_INCENTIVE
    assert report.delays == {0: 1}


def _chain_graph():
    # 0 -> 1 -> 2 -> 3, only the last edge pays; the cut is forced at 0 -> 1
    return _graph(4, [(0, 1), (1, 2), (2, 3), (1, 1)], weights={2: 1.0})


PAIR = (0, 0)


def test_delayed_incentive_from_traces():
    g = _chain_graph()
    cut = min_cut_ssb(g)
    assert cut.cut_edges == (0,)
    traces = [
        [TraceStep("v0", "a0", "v1", 0.0, started=frozenset({PAIR})),
         TraceStep("v1", "a1", "v2", 0.0),
         TraceStep("v2", "a2", "v3", 1.0, released=frozenset({PAIR}))],
        [TraceStep("v0", "a0", "v1", 0.0, started=frozenset({PAIR})),
         TraceStep("v1", "a3", "v1", 0.0),
         TraceStep("v1", "a1", "v2", 0.0),
         TraceStep("v2", "a2", "v3", 1.0, flushed=frozenset({PAIR}))],
    ]
    report = classify_incentive(g, cut, traces)
    assert report.kind == DELAYED_INCENTIVE
    assert report.delays == {2: 1}
    assert report.flushed == 1
    assert report.traversals == 2
    assert report.to_dict()["delays"] == {"2": 1}


def test_exit_reward_is_not_an_incentive():
    g = _chain_graph()
    cut = min_cut_ssb(g)
    trace = [TraceStep("v0", "a0", "v1", 0.0), TraceStep("v1", "a1", "v2", 0.0),
             TraceStep("v2", "a2", "v3", 1.0)]
    report = classify_incentive(g, cut, [trace])
    assert report.kind == ZERO_INCENTIVE
    assert report.delays == {}
    assert report.traversals == 1


def test_bonus_of_a_later_crossing_is_not_credited():
    g = _chain_graph()
    cut = min_cut_ssb(g)
    other = (0, 1)
    trace = [TraceStep("v0", "a0", "v1", 0.0),
             TraceStep("v1", "a1", "v2", 0.0, started=frozenset({other})),
             TraceStep("v2", "a2", "v3", 1.0, released=frozenset({other}))]
    assert classify_incentive(g, cut, [trace]).kind == ZERO_INCENTIVE


def test_traces_must_cross_the_cut():
    g = _chain_graph()
    with pytest.raises(InsufficientTraces):
        classify_incentive(g, min_cut_ssb(g), [[TraceStep("v1", "a1", "v2", 0.0)]])


def test_unshaped_traces_give_zero_incentive(beam_room):
    g = enumerate_graph(beam_room)
    cut = min_cut_ssb(g)
    report = classify_incentive(g, cut, random_traces(beam_room, 30, 300, seed=0))
    assert report.kind == ZERO_INCENTIVE
    assert report.traversals > 0


def test_unshaped_two_lasers_gives_zero_incentive(two_lasers):
    g = enumerate_graph(two_lasers)
    cut = min_cut_ssb(g)
    report = classify_incentive(g, cut, random_traces(two_lasers, 28, 3000, seed=0))
    assert report.kind == ZERO_INCENTIVE
    assert report.delays == {}
    assert report.traversals > 0


@pytest.mark.parametrize("d", [0, 3, 4])
def test_shaped_traces_release_d_plus_one_steps_later(beam_room, d):
    g = enumerate_graph(beam_room)
    cut = min_cut_ssb(g)
    traces = random_traces(beam_room, 30, 300, seed=1, shaping=ShapingConfig(d=d))
    report = classify_incentive(g, cut, traces)
    assert report.kind == DELAYED_INCENTIVE
    assert set(report.delays) == {d + 1}


def test_doorway_cut_enters_the_door(doorway):
    g = enumerate_graph(doorway)
    cut = min_cut_ssb(g)
    assert cut.cut_size == 1
    assert cut.is_zid
    record = edge_record(g, cut.cut_edges[0])
    assert record["src"].endswith("pos=4,2")
    assert record["action"] == "E"
    assert record["dst"].endswith("pos=5,2")


def test_min_cut_against_exhaustive_search():
    checked = 0
    for seed in range(200):
        rng = np.random.default_rng(1000 + seed)
        g = _random_graph(seed, n=int(rng.integers(4, 15)), p=float(rng.uniform(0.15, 0.4)))
        if not has_winning_walk(g):
            continue
        checked += 1
        cut = min_cut_ssb(g)
        cuts = all_min_cuts(g)
        assert {c.cut_size for c in cuts} == {cut.cut_size}
        assert cut.cut_edges in {c.cut_edges for c in cuts}
        assert not has_winning_walk(g, skip_edges=cut.cut_edges)
        for kept in cut.cut_edges:
            rest = tuple(i for i in cut.cut_edges if i != kept)
            assert has_winning_walk(g, skip_edges=rest)
    assert checked >= 50
