# -*- coding: utf-8 -*-
"""Shared fixtures: bundled maps and small literal grids."""

from pathlib import Path

import pytest

from zidlab_pkg.gridworld import load_map, parse_map

MAPS = Path(__file__).resolve().parent.parent / "maps"


@pytest.fixture
def maps_dir():
    return MAPS


@pytest.fixture
def chain():
    return parse_map("S0 . X", name="chain")


@pytest.fixture
def density():
    return load_map(MAPS / "density.map")


@pytest.fixture
def two_lasers():
    return load_map(MAPS / "two_lasers.map")


@pytest.fixture
def rewarded_lasers():
    return load_map(MAPS / "rewarded_lasers.map")


@pytest.fixture
def doorway():
    return load_map(MAPS / "doorway.map")


# one agent, one beam of its own colour between the start and the exit
BEAM_ROOM = """
.   S0 .
L0E .  .
.   X  .
"""


@pytest.fixture
def beam_room():
    return parse_map(BEAM_ROOM, name="beam_room")
