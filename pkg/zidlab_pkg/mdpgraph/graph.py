# -*- coding: utf-8 -*-
"""
ZidLab — Induced graph module.

The directed weighted graph G_M = (V, E, W) of an environment: vertices are
canonical state keys numbered in BFS discovery order, edges are
(source, joint action, target) triples weighted by the step reward.
"""

import json
import logging
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

from ..errors import StateCapExceeded, ValidationError
from ..gridworld import available_actions, step, action_label, initial_states

log = logging.getLogger(__name__)

DEFAULT_STATE_CAP = 200_000


@dataclass(frozen=True)
class Edge:
    src: int
    action: str
    dst: int
    w: float


@dataclass(frozen=True)
class InducedGraph:
    vertices: tuple
    edges: tuple
    initial: frozenset
    goals: frozenset
    base_reward: float = 0.0
    deaths: frozenset = frozenset()
    # WorldState per vertex when built by enumeration; absent after load
    states: tuple = field(default=None, compare=False, repr=False)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    @cached_property
    def index(self):
        return {key: i for i, key in enumerate(self.vertices)}

    @cached_property
    def out_edges(self):
        """Edge ids leaving each vertex, in edge order."""
        out = [[] for _ in self.vertices]
        for i, e in enumerate(self.edges):
            out[e.src].append(i)
        return tuple(tuple(ids) for ids in out)

    @cached_property
    def terminal(self):
        return frozenset(v for v, ids in enumerate(self.out_edges) if not ids)

    def edge_key(self, i):
        e = self.edges[i]
        return self.vertices[e.src], e.action, self.vertices[e.dst]

    def with_weights(self, weights):
        edges = tuple(replace(e, w=float(w)) for e, w in zip(self.edges, weights))
        return replace(self, edges=edges)


# ============================================================
# ENUMERATION
# ============================================================


def enumerate_graph(spec, state_cap=DEFAULT_STATE_CAP, base_reward=0.0):
    """Breadth-first closure of the environment from every initial state."""
    if state_cap <= 0:
        raise ValidationError("state_cap must be positive")

    states = []
    index = {}
    queue = deque()

    def visit(state):
        key = state.key()
        found = index.get(key)
        if found is not None:
            return found
        if len(states) >= state_cap:
            raise StateCapExceeded(state_cap, len(queue))
        index[key] = len(states)
        states.append(state)
        queue.append(len(states) - 1)
        return len(states) - 1

    initial = frozenset(visit(s) for s in initial_states(spec))
    edges = []
    goals = set()
    deaths = set()
    while queue:
        v = queue.popleft()
        s = states[v]
        if s.done:
            (goals if s.won else deaths).add(v)
            continue
        for a in available_actions(spec, s):
            out = step(spec, s, a, check=False)
            dst = visit(out.next_state.with_step(0))
            edges.append(Edge(v, action_label(a), dst, float(out.reward)))

    log.debug("enumerated %s: |V|=%d |E|=%d goals=%d deaths=%d",
              spec.name or "map", len(states), len(edges), len(goals), len(deaths))
    return InducedGraph(
        vertices=tuple(s.key() for s in states),
        edges=tuple(edges),
        initial=initial,
        goals=frozenset(goals),
        base_reward=float(base_reward),
        deaths=frozenset(deaths),
        states=tuple(states),
    )


# ============================================================
# DUMP / LOAD
# ============================================================


def edge_record(g, i):
    e = g.edges[i]
    return {"src": g.vertices[e.src], "action": e.action, "dst": g.vertices[e.dst], "w": e.w}


def dump_graph(g):
    """JSON-ready dict; edges keep BFS discovery order."""
    return {
        "vertices": list(g.vertices),
        "edges": [edge_record(g, i) for i in range(g.n_edges)],
        "initial": [g.vertices[v] for v in sorted(g.initial)],
        "goals": [g.vertices[v] for v in sorted(g.goals)],
        "deaths": [g.vertices[v] for v in sorted(g.deaths)],
        "base_reward": g.base_reward,
    }


def load_graph(data):
    vertices = tuple(data["vertices"])
    index = {k: i for i, k in enumerate(vertices)}
    try:
        edges = tuple(
            Edge(index[r["src"]], r["action"], index[r["dst"]], float(r["w"]))
            for r in data["edges"]
        )
        initial = frozenset(index[k] for k in data["initial"])
        goals = frozenset(index[k] for k in data["goals"])
        deaths = frozenset(index[k] for k in data.get("deaths", []))
    except KeyError as e:
        raise ValidationError(f"graph references unknown vertex {e.args[0]!r}") from None
    return InducedGraph(vertices, edges, initial, goals,
                        float(data.get("base_reward", 0.0)), deaths)


def save_graph(g, path):
    Path(path).write_text(json.dumps(dump_graph(g), indent=1) + "\n", encoding="utf-8")


def read_graph(path):
    return load_graph(json.loads(Path(path).read_text(encoding="utf-8")))
