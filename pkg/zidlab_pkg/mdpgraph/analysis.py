# -*- coding: utf-8 -*-
"""
ZidLab — Graph analysis module.

Reward density and sparsity, winning walks, minimum directed S0-SG
cut-sets (state space bottlenecks) with their zero-incentive
classification, and the incentive-delay measurement over traces.
"""

from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction

import networkx as nx
import numpy as np
from networkx.algorithms.flow import edmonds_karp

from ..errors import (
    EmptyGraph, NoWinningWalk, DisconnectedInitial, InsufficientTraces,
    ValidationError, AnalysisError
)
from .graph import edge_record

DEFAULT_SPARSITY_THRESHOLD = 0.05
EXHAUSTIVE_VERTEX_BUDGET = 16

_SOURCE = "__source__"
_SINK = "__sink__"

# ============================================================
# DENSITY
# ============================================================


def rewarded_edges(g):
    return [i for i, e in enumerate(g.edges) if e.w > g.base_reward]


def reward_density_exact(g):
    """|E+| / |E| as a Fraction."""
    if not g.edges:
        raise EmptyGraph("graph has no edges")
    return Fraction(len(rewarded_edges(g)), g.n_edges)


def reward_density(g):
    return float(reward_density_exact(g))


def is_sparse(g, threshold=DEFAULT_SPARSITY_THRESHOLD):
    """0 < density < threshold. The threshold is a tool convention."""
    if not 0.0 < threshold < 1.0:
        raise ValidationError("sparsity threshold must lie in (0, 1)")
    density = reward_density(g)
    return 0.0 < density < threshold


# ============================================================
# WALKS
# ============================================================


def reachable_from(g, sources, skip_edges=()):
    skip = set(skip_edges)
    seen = set(sources)
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for i in g.out_edges[v]:
            if i in skip:
                continue
            w = g.edges[i].dst
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def has_winning_walk(g, skip_edges=()):
    if not g.initial or not g.goals:
        return False
    return bool(reachable_from(g, g.initial, skip_edges) & g.goals)


# ============================================================
# MINIMUM CUT
# ============================================================


@dataclass(frozen=True)
class CutReport:
    cut_edges: tuple
    cut_size: int
    source_side: frozenset
    is_zid: bool
    max_cut_weight: float

    def to_dict(self, g):
        return {
            "cut_size": self.cut_size,
            "is_zid": self.is_zid,
            "max_cut_weight": self.max_cut_weight,
            "source_side_size": len(self.source_side),
            "cut_edges": [edge_record(g, i) for i in self.cut_edges],
        }


def _report(g, cut_edges, source_side):
    cut_edges = tuple(sorted(cut_edges))
    max_w = max(g.edges[i].w for i in cut_edges)
    return CutReport(
        cut_edges=cut_edges,
        cut_size=len(cut_edges),
        source_side=frozenset(source_side),
        is_zid=max_w <= g.base_reward,
        max_cut_weight=max_w,
    )


def flow_network(g):
    """Unit-capacity network with a super source and super sink.

    Parallel edges between the same pair of vertices add up their unit
    capacities; the super edges carry no capacity attribute (infinite).
    """
    net = nx.DiGraph()
    net.add_nodes_from(range(g.n_vertices))
    for e in g.edges:
        if net.has_edge(e.src, e.dst):
            net[e.src][e.dst]["capacity"] += 1
        else:
            net.add_edge(e.src, e.dst, capacity=1)
    for s in g.initial:
        net.add_edge(_SOURCE, s)
    for t in g.goals:
        net.add_edge(t, _SINK)
    return net


def _check_terminals(g):
    if not g.initial or any(not 0 <= v < g.n_vertices for v in g.initial):
        raise DisconnectedInitial("graph has no valid initial vertex")
    if not has_winning_walk(g):
        raise NoWinningWalk("no goal vertex is reachable from the initial vertices")


def min_cut_ssb(g):
    """Canonical minimum directed S0-SG cut-set (source side of the residual)."""
    _check_terminals(g)
    residual = edmonds_karp(flow_network(g), _SOURCE, _SINK)
    flow_value = residual.graph["flow_value"]

    seen = {_SOURCE}
    queue = deque([_SOURCE])
    while queue:
        u = queue.popleft()
        for v, attr in residual[u].items():
            if v not in seen and attr["flow"] < attr["capacity"]:
                seen.add(v)
                queue.append(v)
    side = frozenset(v for v in seen if v != _SOURCE)

    cut = [i for i, e in enumerate(g.edges) if e.src in side and e.dst not in side]
    if len(cut) != flow_value:
        raise AnalysisError(f"cut size {len(cut)} disagrees with max flow {flow_value}")
    return _report(g, cut, side)


def all_min_cuts(g, vertex_budget=EXHAUSTIVE_VERTEX_BUDGET):
    """Every distinct minimum cut-set, by brute force over vertex 2-partitions.

    Only for graphs with at most `vertex_budget` vertices outside S0 and SG.
    """
    _check_terminals(g)
    free = [v for v in range(g.n_vertices) if v not in g.initial and v not in g.goals]
    if len(free) > vertex_budget:
        raise ValidationError(
            f"{len(free)} free vertices exceed the exhaustive budget of {vertex_budget}"
        )
    k = len(free)
    masks = np.arange(1 << k, dtype=np.int64)
    on_source = np.zeros((1 << k, g.n_vertices), dtype=bool)
    for v in g.initial:
        on_source[:, v] = True
    for bit, v in enumerate(free):
        on_source[:, v] = (masks >> bit) & 1 == 1

    src = np.array([e.src for e in g.edges])
    dst = np.array([e.dst for e in g.edges])
    crossing = on_source[:, src] & ~on_source[:, dst]
    sizes = crossing.sum(axis=1)
    best = sizes.min()

    seen = {}
    for row in np.flatnonzero(sizes == best):
        edge_ids = tuple(np.flatnonzero(crossing[row]).tolist())
        if edge_ids not in seen:
            seen[edge_ids] = np.flatnonzero(on_source[row]).tolist()
    return [_report(g, ids, side) for ids, side in sorted(seen.items())]


# ============================================================
# INCENTIVES
# ============================================================

ZERO_INCENTIVE = "zero"
DELAYED_INCENTIVE = "delayed"
IMMEDIATE_INCENTIVE = "immediate"


@dataclass(frozen=True)
class IncentiveReport:
    """`delays` maps steps-after-traversal to released bonuses.

    `flushed` counts bonuses started on a cut traversal that were paid by
    an episode-end flush instead of ageing out.
    """

    kind: str
    delays: dict
    traversals: int
    flushed: int = 0

    def to_dict(self):
        return {
            "kind": self.kind,
            "traversals": self.traversals,
            "delays": {str(k): v for k, v in sorted(self.delays.items())},
            "flushed": self.flushed,
        }


def _payout(episode, t, pair):
    """(delay, flushed) for a pair started at step t, or None if never paid."""
    for k in range(t, len(episode)):
        if pair in episode[k].released:
            return k - t, False
        if pair in episode[k].flushed:
            return k - t, True
    return None


def classify_incentive(g, cut, traces=None):
    """Zero, immediate or delayed incentive for traversing the bottleneck.

    A non-ZID cut pays on the cut edge itself. For a ZID cut, `traces`
    (episodes of rollout.TraceStep, keys as in `g`) are scanned for cut
    traversals; each crossing pair a traversal starts is followed to the
    step whose shaping bonus releases it. Base rewards earned later, such
    as reaching the exit, are not an incentive for the traversal.
    """
    if not cut.is_zid:
        immediate = sum(1 for i in cut.cut_edges if g.edges[i].w > g.base_reward)
        return IncentiveReport(IMMEDIATE_INCENTIVE, {0: immediate}, 0)
    if traces is None:
        return IncentiveReport(ZERO_INCENTIVE, {}, 0)

    cut_keys = {g.edge_key(i) for i in cut.cut_edges}
    delays = Counter()
    traversals = flushed = 0
    for episode in traces:
        episode = list(episode)
        for t, step in enumerate(episode):
            if (step.src, step.action, step.dst) not in cut_keys:
                continue
            traversals += 1
            for pair in step.started:
                paid = _payout(episode, t, pair)
                if paid is None:
                    continue
                delay, was_flushed = paid
                if was_flushed:
                    flushed += 1
                else:
                    delays[delay] += 1
    if traversals == 0:
        raise InsufficientTraces("no trace traverses the cut")
    if not delays and not flushed:
        return IncentiveReport(ZERO_INCENTIVE, {}, traversals)
    return IncentiveReport(DELAYED_INCENTIVE, dict(delays), traversals, flushed)
