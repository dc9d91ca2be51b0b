# -*- coding: utf-8 -*-
"""
ZidLab — Shaping module.

Potential-based reward shaping with a delayed, counter-driven potential.

C[i, l] is -1 until agent i first crosses laser l in the current episode,
then counts the steps since that crossing. The potential is
phi = -#{(i, l) : C[i, l] <= d}, so each pair is worth -1 until it has
been crossed and aged past d. The shaped reward uses the standard form
r + gamma * phi(s') - phi(s); `strict_paper_sign` (alias
`reverse_shaping_sign`) swaps the two potentials, giving
r + gamma * phi(s) - phi(s') for reproduction runs.

At any episode end (goal, death, or a flushed truncation) the closing
potential counts only never-crossed pairs, so bonuses still pending are
released on the final transition.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError, StateCapExceeded
from .gridworld import available_actions, step, action_label
from .gridworld.env import initial_states
from .mdpgraph.graph import Edge, InducedGraph, DEFAULT_STATE_CAP

# accepted spellings of the canonical wrapper keys
SHAPING_ALIASES = {"reverse_shaping_sign": "strict_paper_sign"}


def canonical_shaping_keys(data):
    """Rename alias keys; an alias next to its canonical key is an error."""
    data = dict(data)
    for alias, name in SHAPING_ALIASES.items():
        if alias in data:
            if name in data:
                raise ValidationError(f"shaping keys {alias} and {name} are the same setting")
            data[name] = data.pop(alias)
    return data


@dataclass(frozen=True)
class ShapingConfig:
    d: int = 0
    gamma: float = 0.95
    strict_paper_sign: bool = False
    flush_on_truncation: bool = True

    def __post_init__(self):
        if self.d < 0:
            raise ValidationError("shaping delay d must be >= 0")
        if not 0.0 < self.gamma <= 1.0:
            raise ValidationError("gamma must lie in (0, 1]")

    @classmethod
    def from_dict(cls, data):
        data = canonical_shaping_keys(data)
        known = {"d", "gamma", "strict_paper_sign", "flush_on_truncation"}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown shaping keys: {', '.join(sorted(unknown))}")
        return cls(
            d=int(data.get("d", cls.d)),
            gamma=float(data.get("gamma", cls.gamma)),
            strict_paper_sign=bool(data.get("strict_paper_sign", cls.strict_paper_sign)),
            flush_on_truncation=bool(data.get("flush_on_truncation", cls.flush_on_truncation)),
        )

    def to_dict(self):
        return {
            "d": self.d,
            "gamma": self.gamma,
            "strict_paper_sign": self.strict_paper_sign,
            "flush_on_truncation": self.flush_on_truncation,
        }


# ============================================================
# COUNTERS AND POTENTIALS
# ============================================================


def new_counters(n_agents, n_lasers):
    return np.full((n_agents, n_lasers), -1, dtype=np.int64)


def delayed_potential(C, d):
    return -float(np.count_nonzero(np.asarray(C) <= d))


def truncation_flush(C):
    """Closing potential: only never-crossed pairs still count."""
    return -float(np.count_nonzero(np.asarray(C) == -1))


def update_counters(C, crossings):
    """Age every started counter by one step, then start newly crossed pairs."""
    C = np.asarray(C)
    updated = np.where(C >= 0, C + 1, C)
    for agent, laser in crossings:
        if C[agent, laser] == -1:
            updated[agent, laser] = 0
    return updated


def cap_counters(C, d):
    return np.minimum(np.asarray(C), d + 1)


def augment_observation(key, C, agent, d):
    """Append agent's counter row, capped at d+1, to a state key."""
    row = cap_counters(np.asarray(C)[agent], d)
    return f"{key}|c{agent}=" + ",".join(str(int(c)) for c in row)


def augment_all(key, C, d):
    for agent in range(np.asarray(C).shape[0]):
        key = augment_observation(key, C, agent, d)
    return key


def shaped_reward(reward, phi_before, phi_after, gamma, strict_paper_sign=False):
    if strict_paper_sign:
        return reward + gamma * phi_before - phi_after
    return reward + gamma * phi_after - phi_before


# ============================================================
# WRAPPER
# ============================================================


@dataclass(frozen=True)
class ShapedStep:
    base: object
    shaped_reward: float
    potential_before: float
    potential_after: float

    @property
    def pulse(self):
        """True when the potential changed on this transition."""
        return self.potential_after != self.potential_before


def closing_potential(outcome, C, config):
    if outcome.terminal or (outcome.truncated and config.flush_on_truncation):
        return truncation_flush(C)
    return delayed_potential(C, config.d)


def shaped_step(env, state, C, action, config):
    """Advance `env` by one step and shape its reward; returns (ShapedStep, C')."""
    phi_before = delayed_potential(C, config.d)
    outcome = env.step(state, action)
    C_next = update_counters(C, outcome.crossings)
    phi_after = closing_potential(outcome, C_next, config)
    reward = shaped_reward(outcome.reward, phi_before, phi_after, config.gamma,
                           config.strict_paper_sign)
    return ShapedStep(outcome, reward, phi_before, phi_after), C_next


class ShapedEnv:
    """GridEnv plus per-episode crossing counters.

    States handed out are (WorldState, C) pairs; the wrapper itself keeps
    nothing between calls, so one instance can drive several rollouts.
    """

    def __init__(self, env, config):
        self.env = env
        self.config = config
        self.spec = env.spec
        self.horizon = env.horizon
        self.n_lasers = len(env.spec.lasers)

    def reset(self, rng):
        return self.env.reset(rng), new_counters(self.env.n_agents, self.n_lasers)

    def actions(self, state):
        return self.env.actions(state)

    def step(self, state, C, action):
        return shaped_step(self.env, state, C, action, self.config)

    def key(self, state, C):
        return augment_all(state.key(), C, self.config.d)


# ============================================================
# SHAPED GRAPHS
# ============================================================


def shape_graph(g, phi, gamma, strict_paper_sign=False):
    """Reweight every edge by a vertex potential (array indexed by vertex)."""
    phi = np.asarray(phi, dtype=float)
    weights = [
        shaped_reward(e.w, phi[e.src], phi[e.dst], gamma, strict_paper_sign)
        for e in g.edges
    ]
    return g.with_weights(weights)


def enumerate_augmented_graph(spec, config, state_cap=DEFAULT_STATE_CAP, base_reward=0.0):
    """Counter-augmented MDP, returned as (shaped_graph, base_graph).

    Vertices are world keys extended with every agent's capped counter row;
    both graphs share vertices and edge order and differ only in weights.
    """
    d = config.d
    n_lasers = len(spec.lasers)
    states = []
    counters = []
    keys = {}
    queue = deque()

    def visit(state, C):
        key = augment_all(state.key(), C, d)
        found = keys.get(key)
        if found is not None:
            return found
        if len(states) >= state_cap:
            raise StateCapExceeded(state_cap, len(queue))
        keys[key] = len(states)
        states.append(state)
        counters.append(C)
        queue.append(len(states) - 1)
        return len(states) - 1

    start = new_counters(spec.n_agents, n_lasers)
    initial = frozenset(visit(s, start) for s in initial_states(spec))
    base_edges = []
    shaped_weights = []
    goals, deaths = set(), set()
    while queue:
        v = queue.popleft()
        s, C = states[v], counters[v]
        if s.done:
            (goals if s.won else deaths).add(v)
            continue
        phi_before = delayed_potential(C, d)
        for a in available_actions(spec, s):
            out = step(spec, s, a, check=False)
            C_next = cap_counters(update_counters(C, out.crossings), d)
            phi_after = truncation_flush(C_next) if out.terminal else delayed_potential(C_next, d)
            dst = visit(out.next_state.with_step(0), C_next)
            base_edges.append(Edge(v, action_label(a), dst, float(out.reward)))
            shaped_weights.append(shaped_reward(out.reward, phi_before, phi_after,
                                                config.gamma, config.strict_paper_sign))

    base = InducedGraph(
        vertices=tuple(sorted(keys, key=keys.get)),
        edges=tuple(base_edges),
        initial=initial,
        goals=frozenset(goals),
        base_reward=float(base_reward),
        deaths=frozenset(deaths),
        states=tuple(states),
    )
    return base.with_weights(shaped_weights), base
