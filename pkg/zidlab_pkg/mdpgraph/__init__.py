# -*- coding: utf-8 -*-
"""
ZidLab — MDP graph package.

Induced graph enumeration and its formal analyses.
"""

from .graph import (
    Edge, InducedGraph, enumerate_graph, dump_graph, load_graph,
    save_graph, read_graph, edge_record, DEFAULT_STATE_CAP,
)
from .analysis import (
    CutReport, IncentiveReport, rewarded_edges, reward_density,
    reward_density_exact, is_sparse, has_winning_walk, reachable_from,
    min_cut_ssb, all_min_cuts, flow_network, classify_incentive,
    ZERO_INCENTIVE, DELAYED_INCENTIVE, IMMEDIATE_INCENTIVE,
    DEFAULT_SPARSITY_THRESHOLD,
)

__all__ = [
    "Edge", "InducedGraph", "enumerate_graph", "dump_graph", "load_graph",
    "save_graph", "read_graph", "edge_record", "DEFAULT_STATE_CAP",
    "CutReport", "IncentiveReport", "rewarded_edges", "reward_density",
    "reward_density_exact", "is_sparse", "has_winning_walk", "reachable_from",
    "min_cut_ssb", "all_min_cuts", "flow_network", "classify_incentive",
    "ZERO_INCENTIVE", "DELAYED_INCENTIVE", "IMMEDIATE_INCENTIVE",
    "DEFAULT_SPARSITY_THRESHOLD",
]
