# -*- coding: utf-8 -*-
from fractions import Fraction

import pytest

from zidlab_pkg.errors import StateCapExceeded, ValidationError
from zidlab_pkg.mdpgraph import (
    enumerate_graph, dump_graph, load_graph, save_graph, read_graph,
    reward_density_exact, rewarded_edges, is_sparse,
)


def test_corridor_graph(chain):
    g = enumerate_graph(chain)
    assert g.n_vertices == 3
    assert g.n_edges == 5
    assert len(g.goals) == 1
    assert g.initial == {0}
    assert reward_density_exact(g) == Fraction(1, 5)


def test_density_room(density):
    g = enumerate_graph(density)
    assert g.n_vertices == 25
    assert g.n_edges == 101
    assert len(rewarded_edges(g)) == 3
    assert reward_density_exact(g) == Fraction(3, 101)
    assert is_sparse(g)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_density_variants_drop_one_edge_each(density, n):
    g = enumerate_graph(density.variant(n))
    assert g.n_edges == 101 - n
    assert reward_density_exact(g) == Fraction(3, 101 - n)


def test_density_grows_with_variant(density):
    values = [reward_density_exact(enumerate_graph(density.variant(n))) for n in range(5)]
    assert values == sorted(values)
    assert len(set(values)) == 5


def test_enumeration_is_deterministic(two_lasers):
    assert dump_graph(enumerate_graph(two_lasers)) == dump_graph(enumerate_graph(two_lasers))


def test_state_cap(density):
    with pytest.raises(StateCapExceeded) as info:
        enumerate_graph(density, state_cap=10)
    assert info.value.cap == 10
    with pytest.raises(ValidationError):
        enumerate_graph(density, state_cap=0)


def test_terminal_vertices_have_no_out_edges(two_lasers):
    g = enumerate_graph(two_lasers)
    assert g.goals and g.deaths
    assert (g.goals | g.deaths) == g.terminal


def test_dump_and_reload(tmp_path, chain):
    g = enumerate_graph(chain)
    path = tmp_path / "g.json"
    save_graph(g, path)
    again = read_graph(path)
    assert again == g
    assert dump_graph(again) == dump_graph(g)


def test_load_rejects_unknown_vertex(chain):
    data = dump_graph(enumerate_graph(chain))
    data["goals"] = ["nowhere"]
    with pytest.raises(ValidationError):
        load_graph(data)
