import itertools

import pytest
from hypothesis import given

import oracles
from generators import irreducible_models, small_models
from raretrans.cycles import (
    NotACycleError,
    check_isolated_union,
    cycle_tree,
    depth,
    exit_costs,
    is_cycle,
    max_strict_subcycles,
    maximal_partition,
    principal_boundary,
    vtj_exit_path,
    vtj_graph,
)
from raretrans.landscape import Landscape
from raretrans.metastability import stability_levels
from raretrans.model import INF, explicit_model


def members(cycles):
    return {c.members for c in cycles}


def proper(tree, n):
    return {c.members for c in tree.nodes if 1 < len(c) < n}


def test_cycle_trees_of_desk_models(well_land, rotor_land):
    assert proper(cycle_tree(well_land), 5) == {frozenset("cde")}
    rotor_tree = cycle_tree(rotor_land)
    assert rotor_tree.member_sets() == {frozenset("a"), frozenset("b"), frozenset("c"), frozenset("abc")}
    single = Landscape(explicit_model(["s"], {}))
    assert len(cycle_tree(single).nodes) == 1


def test_is_cycle_cases(well_land):
    assert is_cycle(well_land, ["c", "d", "e"])
    assert not is_cycle(well_land, ["b", "c"])
    assert is_cycle(well_land, ["b"])
    assert is_cycle(well_land, well_land.states)


def test_depths(well_land, rotor_land):
    assert depth(well_land, ["c", "d", "e"]) == 3
    assert depth(well_land, ["b"]) == 0
    assert depth(rotor_land, ["b"]) == 0
    with pytest.raises(ValueError):
        depth(well_land, well_land.states)
    with pytest.raises(NotACycleError):
        depth(well_land, ["b", "c"])


def test_principal_boundaries(well_land, spur_land):
    assert principal_boundary(well_land, ["c", "d", "e"]) == {"b"}
    assert principal_boundary(well_land, ["b"]) == {"a", "c"}
    assert principal_boundary(spur_land, ["c", "d", "e"]) == {"b"}


def test_exit_costs(well_land, spur_land):
    costs = exit_costs(spur_land, ["c", "d", "e"])
    assert costs == {"a": INF, "b": 0, "f": 4}
    assert exit_costs(well_land, ["b"]) == {"a": 0, "c": 0, "d": INF, "e": INF}


def test_maximal_partitions(well_land):
    assert members(maximal_partition(well_land, ["b", "c", "d", "e"])) == {frozenset("b"), frozenset("cde")}
    assert members(maximal_partition(well_land, ["c", "d", "e"])) == {frozenset("cde")}
    assert members(maximal_partition(well_land, ["d"])) == {frozenset("d")}
    with pytest.raises(ValueError):
        maximal_partition(well_land, [])


def test_strict_subcycles(well_land, rotor_land):
    assert members(max_strict_subcycles(well_land, well_land.states)) == {
        frozenset("a"), frozenset("b"), frozenset("cde")}
    assert members(max_strict_subcycles(rotor_land, rotor_land.states)) == {
        frozenset("a"), frozenset("b"), frozenset("c")}
    assert members(max_strict_subcycles(well_land, ["c", "d", "e"])) == {
        frozenset("c"), frozenset("d"), frozenset("e")}
    with pytest.raises(ValueError):
        max_strict_subcycles(well_land, ["c"])


def test_vtj_graphs(well_land, rotor_land):
    dom = ["b", "c", "d", "e"]
    g = vtj_graph(well_land, maximal_partition(well_land, dom), dom)
    assert set(g.labelled_edges()) == {
        (frozenset("b"), "OUT"), (frozenset("b"), frozenset("cde")), (frozenset("cde"), frozenset("b"))}
    g = vtj_graph(rotor_land, [["b"], ["c"]], ["b", "c"])
    assert set(g.labelled_edges()) == {(frozenset("b"), frozenset("c")), (frozenset("c"), "OUT")}
    single = vtj_graph(well_land, [["c", "d", "e"]], ["c", "d", "e"])
    assert single.labelled_edges() == [(frozenset("cde"), "OUT")]
    with pytest.raises(ValueError):
        vtj_graph(well_land, [["b"]], ["b", "c"])


def test_vtj_exit_paths(well_land, rotor_land):
    path = vtj_exit_path(well_land, ["b", "c", "d", "e"], "c")
    assert [c.members for c in path] == [frozenset("cde"), frozenset("b")]
    assert [c.members for c in vtj_exit_path(well_land, ["b", "c", "d", "e"], "b")] == [frozenset("b")]
    assert [c.members for c in vtj_exit_path(rotor_land, ["b", "c"], "b")] == [frozenset("b"), frozenset("c")]


def test_isolated_unions(well_land):
    assert check_isolated_union(well_land, [["c"], ["d"], ["e"]])
    assert not check_isolated_union(well_land, [["b"], ["c", "d", "e"]])
    assert check_isolated_union(well_land, [["a", "b", "c", "d", "e"]])
    with pytest.raises(ValueError):
        check_isolated_union(well_land, [["c"], ["c"]])
    with pytest.raises(ValueError):
        check_isolated_union(well_land, [["c"], ["e"]])


@given(small_models)
def test_tree_nodes_are_exactly_the_energy_cycles(model):
    land = Landscape(model)
    phi = oracles.heights(model, land.h)
    assert cycle_tree(land).member_sets() == oracles.all_cycles(model, phi)


@given(irreducible_models)
def test_tree_nodes_nest(model):
    tree = cycle_tree(Landscape(model))
    for a, b in itertools.combinations(tree.nodes, 2):
        assert a.members <= b.members or b.members <= a.members or not a.members & b.members


@given(irreducible_models)
def test_depth_formulas_and_monotonicity(model):
    land = Landscape(model)
    tree = cycle_tree(land)
    for c in tree.nodes:
        if len(c) == model.n:
            continue
        assert depth(land, c) == c.depth >= 0
        up = tree.parent[c.members]
        parent = tree.get(up)
        if len(parent) < model.n:
            assert c.depth <= parent.depth


@given(irreducible_models)
def test_cycle_records(model):
    land = Landscape(model)
    for c in cycle_tree(land).nodes:
        if len(c) == model.n:
            continue
        assert c.principal_boundary
        assert {y for y, v in c.exit_costs.items() if v == 0} == c.principal_boundary
        assert all(v >= 0 for v in c.exit_costs.values())
        if len(c) > 1:
            assert land.internal_level(c.indices) < c.exit_level


@given(irreducible_models)
def test_boundary_levels_and_stability(model):
    land = Landscape(model)
    records = stability_levels(land)
    for c in cycle_tree(land).nodes:
        if len(c) == model.n:
            continue
        low = c.bottom_energy
        for x in c.members:
            v = records[x].level
            if land.energy[x] == low:
                assert v >= c.depth
            else:
                assert v < c.depth


@given(irreducible_models)
def test_subcycles_share_exit_level(model):
    land = Landscape(model)
    for c in cycle_tree(land).nodes:
        if len(c) < 2:
            continue
        parts = max_strict_subcycles(land, c)
        assert len(parts) >= 2
        assert len({p.exit_level for p in parts}) == 1
        assert frozenset().union(*(p.members for p in parts)) == c.members


def _partition_ok(land, dom):
    parts = maximal_partition(land, dom)
    union = frozenset().union(*(p.members for p in parts))
    assert union == frozenset(dom)
    assert sum(len(p) for p in parts) == len(dom)
    for k in range(2, len(parts) + 1):
        for group in itertools.combinations(parts, k):
            assert not is_cycle(land, frozenset().union(*(p.members for p in group)))
    return parts


@given(small_models)
def test_partitions_are_maximal(model):
    land = Landscape(model)
    for k in range(1, model.n):
        for dom in itertools.combinations(model.states, k):
            _partition_ok(land, dom)
            path = vtj_exit_path(land, dom, dom[0])
            assert dom[0] in path[0].members
            assert path[-1].principal_boundary - set(dom)
            assert len({c.members for c in path}) == len(path)


@given(irreducible_models)
def test_isolated_partition_systems(model):
    land = Landscape(model)
    for c in cycle_tree(land).nodes:
        if len(c) >= 2:
            assert check_isolated_union(land, max_strict_subcycles(land, c))
