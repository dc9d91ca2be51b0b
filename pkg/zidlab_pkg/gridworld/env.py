# -*- coding: utf-8 -*-
"""
ZidLab — Environment wrapper module.

Binds a MapSpec to an episode horizon and a crossing rule, samples initial
states and memoises available actions per state key. One GridEnv may be
shared across rollouts; the RNG is always supplied by the caller.
"""

from itertools import permutations

from .dynamics import (
    CROSS_ENTER, CROSSING_RULES, available_actions, initial_state, step
)
from ..errors import ValidationError


def initial_states(spec):
    """All initial states S0, in a fixed order.

    With a spawn zone every collision-free ordered placement of the agents
    on the zone is an initial state; otherwise the Start tiles give one.
    """
    if spec.spawn_zone:
        return tuple(initial_state(p) for p in permutations(spec.spawn_zone, spec.n_agents))
    return (initial_state(spec.starts),)


class GridEnv:
    """Episode-level view of a map: horizon, spawning, cached action sets."""

    def __init__(self, spec, horizon=None, crossing_rule=CROSS_ENTER):
        if crossing_rule not in CROSSING_RULES:
            raise ValidationError(f"unknown crossing rule {crossing_rule!r}")
        if horizon is not None and horizon < 1:
            raise ValidationError("horizon must be positive")
        self.spec = spec
        self.horizon = horizon
        self.crossing_rule = crossing_rule
        self.initial = initial_states(spec)
        self._actions = {}

    @property
    def n_agents(self):
        return self.spec.n_agents

    def reset(self, rng):
        """Draw an initial state uniformly from S0."""
        if len(self.initial) == 1:
            return self.initial[0]
        return self.initial[int(rng.integers(len(self.initial)))]

    def actions(self, state):
        key = state.key()
        cached = self._actions.get(key)
        if cached is None:
            cached = available_actions(self.spec, state)
            self._actions[key] = cached
        return cached

    def step(self, state, action):
        # action sets are already enforced by callers drawing from actions()
        return step(self.spec, state, action, horizon=self.horizon,
                    crossing_rule=self.crossing_rule, check=False)
