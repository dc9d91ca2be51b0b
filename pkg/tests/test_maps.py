# -*- coding: utf-8 -*-
import pytest

from zidlab_pkg.errors import (
    MapError, NonRectangular, NoExit, DuplicateStartId, UnknownToken,
    BeamHitsNothing, MissingStart,
)
from zidlab_pkg.gridworld import parse_map, EXIT, LASER


def test_parse_corridor(chain):
    assert (chain.width, chain.height) == (3, 1)
    assert chain.n_agents == 1
    assert chain.starts == ((0, 0),)
    assert chain.exits == frozenset({(2, 0)})
    assert chain.tile((2, 0)).kind == EXIT


def test_comments_and_blank_lines_are_skipped():
    spec = parse_map("# a comment\n\nS0 . X\n#\n")
    assert spec.height == 1


@pytest.mark.parametrize("text, error", [
    ("S0 . X\n. .", NonRectangular),
    ("S0 . .", NoExit),
    ("S0 X\nS0 .", DuplicateStartId),
    ("S0 Q X", UnknownToken),
    ("#teleport 1 2\nS0 . X", UnknownToken),
    ("#disable 0 0 Up\nS0 . X", UnknownToken),
    ("L0N . X\nS0 . .", BeamHitsNothing),
    (". . X", MissingStart),
    ("", NonRectangular),
])
def test_invalid_maps(text, error):
    with pytest.raises(error):
        parse_map(text)


def test_map_errors_carry_line_number():
    with pytest.raises(UnknownToken) as info:
        parse_map("S0 . X\n. Q .")
    assert info.value.line == 2
    assert "line 2" in str(info.value)


def test_laser_facing_adjacent_wall_is_valid():
    spec = parse_map("L0E @ X\nS0 . .")
    assert spec.lasers[0].path == ()


def test_laser_paths(two_lasers):
    first, second = two_lasers.lasers
    assert (first.color, first.source, first.direction) == (0, (3, 1), "W")
    assert first.path == ((2, 1), (1, 1), (0, 1))
    assert (second.color, second.source) == (1, (0, 2))
    assert second.path == ((1, 2), (2, 2), (3, 2))
    assert two_lasers.tile((3, 1)).kind == LASER
    assert not two_lasers.passable((3, 1))


def test_spawn_zone_and_agent_count(two_lasers):
    assert two_lasers.n_agents == 2
    assert two_lasers.spawn_zone == ((0, 0), (1, 0), (2, 0), (3, 0))


def test_variants(density):
    assert density.n_variants == 4
    assert density.variant(0).disabled_edges == frozenset()
    m2 = density.variant(2)
    assert m2.disabled_edges == {((0, 4), "E"), ((4, 4), "W")}
    assert m2.variant_index == 2


def test_with_agents(doorway):
    assert doorway.with_agents(3).n_agents == 3
    with pytest.raises(MapError):
        doorway.with_agents(5)
    with pytest.raises(MapError):
        parse_map("S0 . X").with_agents(1)


def test_render_marks_agents(chain):
    from zidlab_pkg.gridworld import initial_state
    text = chain.render(initial_state([(1, 0)]))
    assert text.split() == ["S0", "0", "X"]
