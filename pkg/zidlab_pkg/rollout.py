# -*- coding: utf-8 -*-
"""
ZidLab — Rollout module.

Uniform random exploration over available joint actions, and the exact
exit probability of that same random walk computed by forward dynamic
programming on the induced graph. The second is the oracle of the first.
Recorded random episodes (traces) feed the incentive-delay measurement.
"""

import logging
from dataclasses import dataclass, asdict

import numpy as np
from scipy import sparse, stats

from .errors import ValidationError, AnalysisError
from .gridworld import GridEnv, action_label, CROSS_ENTER
from .mdpgraph import enumerate_graph, DEFAULT_STATE_CAP
from .shaping import new_counters, update_counters, shaped_step

log = logging.getLogger(__name__)

DEFAULT_STEP_BUDGET = 200_000
DEFAULT_HORIZONS = (12, 13, 14)
CONFIDENCE = 0.95


def episode_rng(seed, episode):
    """Counter-based stream: one independent Generator per (seed, episode)."""
    return np.random.default_rng([seed, episode])


# ============================================================
# MONTE CARLO
# ============================================================


@dataclass(frozen=True)
class ExplorationStats:
    map: str
    variant: int
    horizon: int
    seed: int
    total_steps: int
    episodes: int
    exits: int
    deaths: int
    truncations: int

    @property
    def exit_rate(self):
        return self.exits / self.episodes if self.episodes else 0.0

    def to_row(self):
        row = asdict(self)
        row["exit_rate"] = self.exit_rate
        return row


def random_explore(spec, horizon, step_budget=DEFAULT_STEP_BUDGET, seed=0):
    """Run uniform-random episodes until `step_budget` steps are spent.

    The episode running when the budget runs out is played to its end, so
    total_steps lies in [step_budget, step_budget + horizon).
    """
    if step_budget <= 0:
        raise ValidationError("step_budget must be positive")
    if horizon is None or horizon < 1:
        raise ValidationError("random exploration needs a positive horizon")

    env = GridEnv(spec, horizon=horizon)
    total = episodes = exits = deaths = truncations = 0
    while total < step_budget:
        rng = episode_rng(seed, episodes)
        episodes += 1
        state = env.reset(rng)
        while True:
            actions = env.actions(state)
            if not actions:
                raise AnalysisError(f"no available action in live state {state.key()}")
            out = env.step(state, actions[int(rng.integers(len(actions)))])
            total += 1
            if out.death:
                deaths += 1
                break
            if out.terminal:
                exits += 1
                break
            if out.truncated:
                truncations += 1
                break
            state = out.next_state

    result = ExplorationStats(
        map=spec.name, variant=spec.variant_index, horizon=horizon, seed=seed,
        total_steps=total, episodes=episodes, exits=exits, deaths=deaths,
        truncations=truncations,
    )
    log.debug("explore %s/M%d h=%d seed=%d: %d episodes, exit rate %.4f",
              spec.name, spec.variant_index, horizon, seed, episodes, result.exit_rate)
    return result


# ============================================================
# DP ORACLE
# ============================================================


@dataclass(frozen=True)
class ExitProbabilityTable:
    """probabilities[h] = P(all agents exited within h steps)."""

    probabilities: tuple

    @property
    def max_horizon(self):
        return len(self.probabilities) - 1

    def at(self, horizon):
        if not 0 <= horizon <= self.max_horizon:
            raise ValidationError(f"horizon {horizon} outside table range 0..{self.max_horizon}")
        return self.probabilities[horizon]


def transition_matrix(g):
    """Row-stochastic uniform-policy matrix; rows of terminal vertices are empty.

    Parallel edges to one target each keep their own share of the draw.
    """
    src = np.fromiter((e.src for e in g.edges), dtype=np.int64, count=g.n_edges)
    dst = np.fromiter((e.dst for e in g.edges), dtype=np.int64, count=g.n_edges)
    out_degree = np.bincount(src, minlength=g.n_vertices)
    data = 1.0 / out_degree[src]
    # duplicate (src, dst) entries are summed by the csr conversion
    return sparse.coo_matrix((data, (src, dst)), shape=(g.n_vertices, g.n_vertices)).tocsr()


def exact_exit_probability(g, max_horizon):
    """Forward DP of the uniform random walk started uniformly on S0.

    Goal and death vertices have no out-edges, so mass reaching them
    leaves the walk; only the goal share is counted.
    """
    if max_horizon < 0:
        raise ValidationError("max_horizon must be >= 0")
    probabilities = [0.0]
    if max_horizon == 0 or not g.initial:
        return ExitProbabilityTable(tuple(probabilities * (max_horizon + 1)))

    forward = transition_matrix(g).T.tocsr()
    goals = np.fromiter(sorted(g.goals), dtype=np.int64)
    mass = np.zeros(g.n_vertices)
    mass[sorted(g.initial)] = 1.0 / len(g.initial)
    exited = 0.0
    for _ in range(max_horizon):
        mass = forward @ mass
        exited += float(mass[goals].sum()) if goals.size else 0.0
        probabilities.append(min(exited, 1.0))
    return ExitProbabilityTable(tuple(probabilities))


def exit_probability(spec, horizon, state_cap=DEFAULT_STATE_CAP):
    """Oracle for one map: enumerate, then DP up to `horizon`."""
    g = enumerate_graph(spec, state_cap)
    return exact_exit_probability(g, horizon).at(horizon)


# ============================================================
# AGREEMENT
# ============================================================


def oracle_interval(probability, episodes, confidence=CONFIDENCE):
    """Central binomial interval of the exit rate over `episodes` trials."""
    if episodes <= 0:
        raise ValidationError("episodes must be positive")
    lo, hi = stats.binom.interval(confidence, episodes, probability)
    return lo / episodes, hi / episodes


def agrees_with_oracle(result, probability, confidence=CONFIDENCE):
    lo, hi = oracle_interval(probability, result.episodes, confidence)
    return lo <= result.exit_rate <= hi


def rate_interval(result, confidence=CONFIDENCE):
    """Clopper-Pearson interval of an observed exit rate (for charts)."""
    if not result.episodes:
        return 0.0, 0.0
    ci = stats.binomtest(result.exits, result.episodes).proportion_ci(confidence)
    return ci.low, ci.high


# ============================================================
# TRACES
# ============================================================


@dataclass(frozen=True)
class TraceStep:
    """One recorded transition; keys are world keys, as in the induced graph.

    `started` holds the (agent, laser) pairs first crossed on this
    transition. `released` holds the pairs whose shaping bonus was paid
    here by ageing past d, `flushed` those paid early by the closing
    flush. Unshaped traces release nothing.
    """

    src: str
    action: str
    dst: str
    reward: float
    started: frozenset = frozenset()
    released: frozenset = frozenset()
    flushed: frozenset = frozenset()


def _pairs(mask):
    return frozenset((int(i), int(l)) for i, l in np.argwhere(mask))


def _payouts(C, C_next, outcome, config):
    aged = (C <= config.d) & (C_next > config.d)
    if outcome.terminal or (outcome.truncated and config.flush_on_truncation):
        pending = (C_next >= 0) & (C_next <= config.d)
    else:
        pending = np.zeros_like(aged)
    return _pairs(aged), _pairs(pending)


def random_traces(spec, horizon, episodes, seed=0, shaping=None, crossing_rule=CROSS_ENTER):
    """Record `episodes` uniform-random episodes, optionally under shaping.

    With a ShapingConfig the recorded reward is the shaped one and each
    step says which pending bonuses it paid out.
    """
    if episodes <= 0:
        raise ValidationError("episodes must be positive")
    if horizon is None or horizon < 1:
        raise ValidationError("traces need a positive horizon")

    env = GridEnv(spec, horizon=horizon, crossing_rule=crossing_rule)
    traces = []
    for episode in range(episodes):
        rng = episode_rng(seed, episode)
        state = env.reset(rng)
        C = new_counters(spec.n_agents, len(spec.lasers))
        steps = []
        while True:
            actions = env.actions(state)
            if not actions:
                raise AnalysisError(f"no available action in live state {state.key()}")
            action = actions[int(rng.integers(len(actions)))]
            if shaping is None:
                out = env.step(state, action)
                C_next = update_counters(C, out.crossings)
                reward = float(out.reward)
                released = flushed = frozenset()
            else:
                shaped, C_next = shaped_step(env, state, C, action, shaping)
                out = shaped.base
                reward = shaped.shaped_reward
                released, flushed = _payouts(C, C_next, out, shaping)
            steps.append(TraceStep(
                state.key(), action_label(action), out.next_state.key(), reward,
                _pairs((C == -1) & (C_next == 0)), released, flushed,
            ))
            if out.terminal or out.truncated:
                break
            state, C = out.next_state, C_next
        traces.append(tuple(steps))
    log.debug("recorded %d traces on %s (shaping=%s)", len(traces), spec.name,
              None if shaping is None else shaping.d)
    return traces
