import pytest
from hypothesis import given

import oracles
from generators import irreducible_models, irreversible_models, small_models
from raretrans.landscape import (
    Landscape,
    bottom,
    comm_height,
    comm_height_sets,
    external_boundary,
    height_matrix,
    path_elevation,
)
from raretrans.energy import EnergyTable, virtual_energy
from raretrans.model import INF, ModelError


def test_path_elevations(well):
    h = virtual_energy(well)
    assert path_elevation(well, h, ["c", "b", "a"]) == 4
    assert path_elevation(well, h, ["a", "c"]) == INF
    assert path_elevation(well, h, ["d"]) == 3
    with pytest.raises(ModelError):
        path_elevation(well, h, ["zz"])


def test_heights_on_desk_models(well, rotor):
    hw, hr = virtual_energy(well), virtual_energy(rotor)
    assert comm_height(well, hw, "c", "a") == comm_height(well, hw, "a", "c") == 4
    assert comm_height(rotor, hr, "b", "a") == comm_height(rotor, hr, "a", "b") == 1
    assert comm_height(well, hw, "e", "e") == 2


def test_set_heights(well):
    h = virtual_energy(well)
    assert comm_height_sets(well, h, ["c", "d", "e"], ["a", "b"]) == 4
    assert comm_height_sets(well, h, ["b", "c"], ["c", "d"]) == 1
    assert comm_height_sets(well, h, ["c"], ["e"]) == comm_height(well, h, "c", "e")
    with pytest.raises(ValueError):
        comm_height_sets(well, h, [], ["a"])


def test_bottoms(well):
    h = virtual_energy(well)
    assert bottom(h, ["c", "d", "e"]) == (frozenset({"c"}), 1)
    assert bottom(h, well.states) == (frozenset({"a"}), 0)
    tie = EnergyTable(("a", "b", "c"), (0, 0, 1))
    assert bottom(tie, ["a", "b", "c"])[0] == {"a", "b"}


def test_external_boundaries(well, rotor):
    assert external_boundary(well, ["c", "d", "e"]) == {"b"}
    assert external_boundary(well, well.states) == frozenset()
    assert external_boundary(rotor, ["a"]) == {"b"}


@given(irreversible_models)
def test_heights_are_symmetric(model):
    phi = height_matrix(model)
    assert all(phi[x][y] == phi[y][x] for x in range(model.n) for y in range(model.n))


@given(small_models)
def test_heights_match_simple_path_enumeration(model):
    land = Landscape(model)
    assert land.phi == oracles.heights(model, land.h)


@given(irreducible_models)
def test_height_bounds(model):
    land = Landscape(model)
    n = model.n
    for x in range(n):
        for y in range(n):
            assert land.phi[x][y] >= max(land.h[x], land.h[y])
            assert land.phi_sets([x, (x + 1) % n], [y]) <= land.phi[x][y]


@given(irreducible_models)
def test_witness_paths_are_simple_and_optimal(model):
    land = Landscape(model)
    for x in range(model.n):
        for y in range(model.n):
            path = land.witness(x, y)
            assert len(set(path)) == len(path)
            assert path[0] == x and path[-1] == y
            if x != y:
                assert oracles.elevation(model, land.h, path) == land.phi[x][y]
