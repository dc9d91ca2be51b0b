# -*- coding: utf-8 -*-
"""
ZidLab — Gridworld package.

Deterministic, fully observable multi-agent laser grid-world.
"""

from .maps import (
    MapSpec, Tile, Laser, parse_map, load_map,
    MOVES, NORTH, EAST, SOUTH, WEST, STAY,
    FLOOR, WALL, EXIT, GEM, START, LASER,
)
from .dynamics import (
    WorldState, StepOutcome, compute_beams, available_actions, step,
    initial_state, action_label, CROSS_ENTER, CROSS_LEAVE,
)
from .env import GridEnv, initial_states

__all__ = [
    "MapSpec", "Tile", "Laser", "parse_map", "load_map",
    "MOVES", "NORTH", "EAST", "SOUTH", "WEST", "STAY",
    "FLOOR", "WALL", "EXIT", "GEM", "START", "LASER",
    "WorldState", "StepOutcome", "compute_beams", "available_actions", "step",
    "initial_state", "action_label", "CROSS_ENTER", "CROSS_LEAVE",
    "GridEnv", "initial_states",
]
