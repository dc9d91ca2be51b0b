# -*- coding: utf-8 -*-
"""
ZidLab — Dynamics module.

Pure transition function of the laser grid-world: beams, available joint
actions and the simultaneous-move step. Nothing here holds state; the same
MapSpec can be shared by any number of concurrent rollouts.
"""

from dataclasses import dataclass, replace
from itertools import product

from ..errors import ActionUnavailable
from .maps import MOVES, STAY, shift

CROSS_ENTER = "enter"
CROSS_LEAVE = "leave"
CROSSING_RULES = (CROSS_ENTER, CROSS_LEAVE)


@dataclass(frozen=True)
class WorldState:
    positions: tuple
    alive: tuple
    exited: tuple
    gems_collected: int = 0
    step_count: int = 0

    @property
    def n_agents(self):
        return len(self.positions)

    def active(self, i):
        return self.alive[i] and not self.exited[i]

    @property
    def done(self):
        return not all(self.alive) or all(self.exited)

    @property
    def won(self):
        return all(self.alive) and all(self.exited)

    def key(self):
        """Canonical identifier (sorted field order, step count excluded)."""
        alive = ",".join("1" if a else "0" for a in self.alive)
        exited = ",".join("1" if e else "0" for e in self.exited)
        pos = ";".join(f"{x},{y}" for x, y in self.positions)
        return f"alive={alive}|exited={exited}|gems={self.gems_collected}|pos={pos}"

    def with_step(self, step_count):
        return replace(self, step_count=step_count)


def initial_state(positions):
    n = len(positions)
    return WorldState(
        positions=tuple(tuple(p) for p in positions),
        alive=(True,) * n,
        exited=(False,) * n,
    )


def action_label(action):
    return ",".join(action)


@dataclass(frozen=True)
class StepOutcome:
    next_state: WorldState
    reward: int
    terminal: bool
    truncated: bool
    crossings: frozenset
    death: bool = False


# ============================================================
# BEAMS
# ============================================================


def compute_beams(spec, positions, active=None):
    """Beam tiles of every laser given agent positions.

    `active` masks which agents are on the grid (default: all). A beam
    stops on walls, other sources and the grid edge (all excluded from the
    path) and on an agent of its own colour, whose tile is part of the beam.
    """
    blockers = {}
    for i, pos in enumerate(positions):
        if active is None or active[i]:
            blockers[tuple(pos)] = i
    beams = []
    for laser in spec.lasers:
        tiles = []
        for tile in laser.path:
            tiles.append(tile)
            if blockers.get(tile, -1) == laser.color:
                break
        beams.append(frozenset(tiles))
    return tuple(beams)


# ============================================================
# ACTIONS
# ============================================================


def agent_moves(spec, state, i):
    """Legal individual moves of agent i, in MOVES order."""
    if not state.active(i):
        return (STAY,)
    pos = state.positions[i]
    moves = []
    for move in MOVES:
        if move == STAY:
            moves.append(move)
            continue
        target = shift(pos, move)
        if not spec.passable(target):
            continue
        if (pos, move) in spec.disabled_edges:
            continue
        moves.append(move)
    return tuple(moves)


def _collides(state, action):
    targets = {}
    for i, move in enumerate(action):
        if not state.active(i):
            continue
        target = shift(state.positions[i], move)
        if target in targets:
            return True
        targets[target] = i
    for i, move in enumerate(action):
        if not state.active(i) or move == STAY:
            continue
        j = _occupant(state, shift(state.positions[i], move))
        if j is not None and j != i and shift(state.positions[j], action[j]) == state.positions[i]:
            return True
    return False


def _occupant(state, pos):
    for j, p in enumerate(state.positions):
        if p == pos and state.active(j):
            return j
    return None


def available_actions(spec, state):
    """Joint actions available in `state`, in canonical (product) order.

    Empty only when the episode is over.
    """
    if state.done:
        return ()
    per_agent = [agent_moves(spec, state, i) for i in range(state.n_agents)]
    return tuple(a for a in product(*per_agent) if not _collides(state, a))


# ============================================================
# STEP
# ============================================================


def step(spec, state, action, horizon=None, crossing_rule=CROSS_ENTER, check=True):
    """Apply a joint action; returns a StepOutcome."""
    action = tuple(action)
    if check and action not in available_actions(spec, state):
        raise ActionUnavailable(f"action {action_label(action)} unavailable in {state.key()}")

    n = state.n_agents
    active = tuple(state.active(i) for i in range(n))
    positions = tuple(
        shift(state.positions[i], action[i]) if active[i] else state.positions[i]
        for i in range(n)
    )
    beams = compute_beams(spec, positions, active)

    dead = set()
    for i in range(n):
        if not active[i]:
            continue
        for laser, beam in zip(spec.lasers, beams):
            if laser.color != i and positions[i] in beam:
                dead.add(i)
                break

    next_step = state.step_count + 1
    if dead:
        alive = tuple(state.alive[i] and i not in dead for i in range(n))
        nxt = WorldState(positions, alive, state.exited, state.gems_collected, next_step)
        return StepOutcome(nxt, -1, True, False, frozenset(), death=True)

    reward = 0
    gems = state.gems_collected
    exited = list(state.exited)
    for i in range(n):
        if not active[i]:
            continue
        idx = spec.gem_index.get(positions[i])
        if idx is not None and not gems & (1 << idx):
            gems |= 1 << idx
            reward += 1
        if positions[i] in spec.exits:
            exited[i] = True
            reward += 1

    nxt = WorldState(positions, state.alive, tuple(exited), gems, next_step)
    terminal = all(exited)
    truncated = not terminal and horizon is not None and next_step >= horizon
    crossings = _crossings(spec, state.positions, positions, active, crossing_rule)
    return StepOutcome(nxt, reward, terminal, truncated, crossings)


def _crossings(spec, before, after, active, rule):
    found = set()
    for i, is_active in enumerate(active):
        if not is_active:
            continue
        for laser in spec.lasers:
            was_on = before[i] in laser.path
            is_on = after[i] in laser.path
            if rule == CROSS_ENTER and is_on and not was_on:
                found.add((i, laser.id))
            elif rule == CROSS_LEAVE and was_on and not is_on:
                found.add((i, laser.id))
    return frozenset(found)
