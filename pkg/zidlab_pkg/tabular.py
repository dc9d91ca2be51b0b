# -*- coding: utf-8 -*-
"""
ZidLab — Tabular learning module.

Exact value iteration on induced graphs, and joint-action tabular
Q-learning with a linearly annealed epsilon-greedy schedule. The learner
is a desk-scale substitute for value-decomposition deep learners: the
effect of a delayed shaping pulse is a property of the reward process,
which a table shows as well as a network.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ValidationError, NonFinite
from .gridworld import GridEnv, action_label
from .shaping import ShapedEnv, ShapedStep

log = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-7
NO_SHAPING = "no-shaping"


# ============================================================
# VALUE ITERATION
# ============================================================


@dataclass(frozen=True)
class ValueResult:
    values: np.ndarray
    greedy: tuple
    iterations: int
    residual: float


def value_iteration(g, gamma, tolerance=1e-10, max_iterations=100_000,
                    tie_tolerance=TIE_TOLERANCE):
    """Optimal values and the full argmax action set of every vertex.

    Vertices without out-edges (goals, deaths) are worth 0. Greedy sets
    keep every action whose Q-value is within `tie_tolerance` of the max.
    """
    if not 0.0 < gamma < 1.0:
        raise ValidationError("value iteration needs gamma in (0, 1)")
    n = g.n_vertices
    src = np.fromiter((e.src for e in g.edges), dtype=np.int64, count=g.n_edges)
    dst = np.fromiter((e.dst for e in g.edges), dtype=np.int64, count=g.n_edges)
    w = np.fromiter((e.w for e in g.edges), dtype=float, count=g.n_edges)
    if not np.all(np.isfinite(w)):
        raise NonFinite("edge weights are not finite")
    has_out = np.zeros(n, dtype=bool)
    has_out[src] = True

    values = np.zeros(n)
    residual = np.inf
    iterations = 0
    while residual >= tolerance:
        if iterations >= max_iterations:
            raise NonFinite(f"value iteration stalled at residual {residual:.3e}")
        q = w + gamma * values[dst]
        updated = np.full(n, -np.inf)
        np.maximum.at(updated, src, q)
        updated[~has_out] = 0.0
        if not np.all(np.isfinite(updated)):
            raise NonFinite("value iteration diverged")
        residual = float(np.max(np.abs(updated - values))) if n else 0.0
        values = updated
        iterations += 1

    q = w + gamma * values[dst]
    best = values[src]
    greedy = [set() for _ in range(n)]
    for i in np.flatnonzero(q >= best - tie_tolerance):
        greedy[src[i]].add(g.edges[i].action)
    return ValueResult(values, tuple(frozenset(s) for s in greedy), iterations, residual)


# ============================================================
# Q TABLE
# ============================================================


class QTable:
    """Sparse Q(s, a) with a default of 0 and per-entry visit counts."""

    def __init__(self, default=0.0):
        self.default = default
        self.values = {}
        self.visits = {}

    def __len__(self):
        return len(self.values)

    def get(self, key, label):
        return self.values.get((key, label), self.default)

    def row(self, key, actions):
        return np.array([self.get(key, action_label(a)) for a in actions])

    def greedy_index(self, key, actions):
        # np.argmax returns the first maximum: ties go to the lowest action index
        return int(np.argmax(self.row(key, actions)))

    def max_value(self, key, actions):
        return float(self.row(key, actions).max()) if actions else 0.0

    def update(self, key, label, target, learning_rate):
        old = self.get(key, label)
        self.values[(key, label)] = old + learning_rate * (target - old)
        self.visits[(key, label)] = self.visits.get((key, label), 0) + 1

    def snapshot(self):
        return dict(sorted(self.values.items()))


# ============================================================
# SCHEDULE
# ============================================================


@dataclass(frozen=True)
class LearnSchedule:
    total_steps: int = 300_000
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_anneal_steps: int = 150_000
    gamma: float = 0.95
    learning_rate: float = 0.1
    eval_interval: int = 5_000
    eval_episodes: int = 20
    horizon: int = 28

    def __post_init__(self):
        if self.total_steps <= 0 or self.eval_interval <= 0 or self.horizon <= 0:
            raise ValidationError("total_steps, eval_interval and horizon must be positive")
        if self.epsilon_anneal_steps < 0:
            raise ValidationError("epsilon_anneal_steps must be >= 0")
        if not 0.0 < self.gamma < 1.0:
            raise ValidationError("gamma must lie in (0, 1)")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValidationError("learning_rate must lie in (0, 1]")

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown learning keys: {', '.join(sorted(unknown))}")
        return cls(**{k: type(getattr(cls, k))(v) for k, v in data.items()})

    def epsilon(self, step):
        if self.epsilon_anneal_steps == 0 or step >= self.epsilon_anneal_steps:
            return self.epsilon_end
        frac = step / self.epsilon_anneal_steps
        return self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)


# ============================================================
# ENV ADAPTER
# ============================================================


class _PlainEnv:
    """Unshaped GridEnv behind the ShapedEnv call signature."""

    def __init__(self, env):
        self.env = env
        self.horizon = env.horizon

    def reset(self, rng):
        return self.env.reset(rng), None

    def actions(self, state):
        return self.env.actions(state)

    def step(self, state, C, action):
        out = self.env.step(state, action)
        return ShapedStep(out, float(out.reward), 0.0, 0.0), None

    def key(self, state, C):
        return state.key()


def _learning_view(env):
    return env if isinstance(env, ShapedEnv) else _PlainEnv(env)


def learning_env(spec, schedule, shaping=None, crossing_rule="enter"):
    """GridEnv at the schedule's horizon, wrapped for shaping when given."""
    env = GridEnv(spec, horizon=schedule.horizon, crossing_rule=crossing_rule)
    return ShapedEnv(env, shaping) if shaping is not None else env


# ============================================================
# LEARNING
# ============================================================


def _episode_rng(seed, episode):
    return np.random.default_rng([seed, episode])


def greedy_eval(q, env, episodes, horizon, seed=0):
    """Fraction of greedy episodes (lowest-index ties) in which every agent exits."""
    view = _learning_view(env)
    wins = 0
    for episode in range(episodes):
        state, C = view.reset(_episode_rng(seed, episode))
        for _ in range(horizon):
            actions = view.actions(state)
            a = actions[q.greedy_index(view.key(state, C), actions)]
            st, C = view.step(state, C, a)
            out = st.base
            if out.terminal:
                wins += int(out.next_state.won)
                break
            if out.truncated:
                break
            state = out.next_state
    return wins / episodes if episodes else 0.0


@dataclass(frozen=True)
class LearningCurve:
    steps: tuple
    exit_rates: tuple

    @property
    def final_exit_rate(self):
        return self.exit_rates[-1] if self.exit_rates else 0.0

    def auc(self):
        """Mean exit rate over evaluation points (area normalised by length)."""
        return float(np.mean(self.exit_rates)) if self.exit_rates else 0.0

    def steps_to(self, rate):
        for s, r in zip(self.steps, self.exit_rates):
            if r >= rate:
                return s
        return None


def q_learning(env, schedule, seed=0, eval_seed=None):
    """Epsilon-greedy one-step Q-learning; returns (QTable, LearningCurve).

    Truncated transitions bootstrap from the next state; terminal ones do
    not. Fully deterministic for a given (env, schedule, seed).
    """
    if env.horizon is None:
        raise ValidationError("the learning env needs a horizon")
    view = _learning_view(env)
    q = QTable()
    eval_seed = seed if eval_seed is None else eval_seed
    gamma, lr = schedule.gamma, schedule.learning_rate

    steps, rates = [], []
    step = 0
    episode = 0
    while step < schedule.total_steps:
        rng = _episode_rng(seed, episode)
        episode += 1
        state, C = view.reset(rng)
        while step < schedule.total_steps:
            key = view.key(state, C)
            actions = view.actions(state)
            if rng.random() < schedule.epsilon(step):
                idx = int(rng.integers(len(actions)))
            else:
                idx = q.greedy_index(key, actions)
            st, C_next = view.step(state, C, actions[idx])
            out = st.base
            target = st.shaped_reward
            if not out.terminal:
                nxt = out.next_state
                target += gamma * q.max_value(view.key(nxt, C_next), view.actions(nxt))
            q.update(key, action_label(actions[idx]), target, lr)
            step += 1

            if step % schedule.eval_interval == 0:
                steps.append(step)
                rates.append(greedy_eval(q, env, schedule.eval_episodes,
                                         schedule.horizon, eval_seed))
            if out.terminal or out.truncated:
                break
            state, C = out.next_state, C_next

    log.debug("q-learning seed=%d: %d episodes, %d entries, final exit rate %.3f",
              seed, episode, len(q), rates[-1] if rates else 0.0)
    return q, LearningCurve(tuple(steps), tuple(rates))


# ============================================================
# STATISTICS
# ============================================================


def delay_trend(aucs_by_delay):
    """Spearman correlation of AUC against d, pooled over seeds.

    `aucs_by_delay` maps d -> list of per-seed AUCs. Returns
    (rho, one-sided p-value for a decreasing trend).
    """
    ds, values = [], []
    for d, aucs in sorted(aucs_by_delay.items()):
        ds.extend([d] * len(aucs))
        values.extend(aucs)
    result = stats.spearmanr(ds, values, alternative="less")
    return float(result.statistic), float(result.pvalue)


def beats_baseline(shaped, baseline):
    """One-sided Mann-Whitney p-value that `shaped` exceeds `baseline`."""
    result = stats.mannwhitneyu(shaped, baseline, alternative="greater")
    return float(result.pvalue)
