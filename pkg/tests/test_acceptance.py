"""Acceptance criteria, one test per criterion.

Each test appends a ``ACCEPTANCE n: PASS|FAIL ...`` line that the terminal
summary prints, then asserts. Random families use fixed generator seeds.
"""

import itertools
import math
import time

import pytest

import conftest
import oracles
from generators import irreducible, irreversible, metropolis, seeded, weakly_reversible
from raretrans import desk
from raretrans.chain import expected_hitting_solve, ols_slope
from raretrans.cycles import cycle_tree, exit_costs, is_cycle, maximal_partition
from raretrans.energy import energy_slope_estimate, reconstruct_potential, virtual_energy
from raretrans.landscape import Landscape
from raretrans.metastability import stability_levels
from raretrans.model import INF
from raretrans.simulator import (
    experiment_escape_scaling,
    experiment_excursion,
    experiment_exit_distribution,
    experiment_exponential_law,
    experiment_gate_crossing,
    experiment_recurrence,
    experiment_tube_probability,
    replay,
)

pytestmark = pytest.mark.acceptance

_REPORTS = {}


def record(number, ok, detail, started, budget):
    elapsed = time.perf_counter() - started
    in_time = budget is None or elapsed <= budget
    verdict = "PASS" if ok and in_time else "FAIL"
    limit = f" of {budget}s" if budget is not None else ""
    line = f"ACCEPTANCE {number}: {verdict} {detail} ({elapsed:.1f}s{limit})"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line
    assert in_time, line


def desk_models():
    return [f() for f in desk.DESK_MODELS.values()]


def test_energy_matches_stationary_slopes():
    start = time.perf_counter()
    worst = 0.0
    for model in seeded(irreducible, 50, seed=1001, max_states=8):
        slopes = energy_slope_estimate(model, (5, 10, 20))
        h = virtual_energy(model).h
        worst = max([worst] + [abs(s - float(v)) for s, v in zip(slopes, h)])
    record(1, worst <= 0.05, f"max |slope - H| = {worst:.4f} over 50 models", start, 60)


def test_metropolis_energy_is_shifted_potential():
    start = time.perf_counter()
    bad = 0
    for model in seeded(metropolis, 50, seed=1002):
        low = min(model.potential)
        bad += list(virtual_energy(model).h) != [u - low for u in model.potential]
    record(2, bad == 0, f"{bad} mismatches over 50 models", start, 5)


def test_height_symmetry_and_energy_steps():
    start = time.perf_counter()
    models = desk_models() + seeded(irreversible, 50, seed=1003)
    asym = jumps = 0
    for model in models:
        land = Landscape(model)
        n = model.n
        asym += sum(land.phi[x][y] != land.phi[y][x] for x in range(n) for y in range(n))
        jumps += sum(
            land.h[y] > land.h[x] + model.delta[x][y]
            for x in range(n) for y in model.successors(x)
        )
    record(3, asym == 0 and jumps == 0,
           f"{asym} asymmetric pairs, {jumps} edges with H(y) > H(x)+delta over {len(models)} models",
           start, 10)


def test_cycle_tree_equals_exhaustive_cycles():
    start = time.perf_counter()
    bad = 0
    for model in seeded(irreducible, 20, seed=1004, max_states=7):
        land = Landscape(model)
        h = oracles.energy(model)
        phi = oracles.heights(model, h)
        want = oracles.all_cycles(model, phi)
        subsets = {
            frozenset(c)
            for k in range(1, model.n + 1)
            for c in itertools.combinations(model.states, k)
            if is_cycle(land, c)
        }
        bad += not (cycle_tree(land).member_sets() == subsets == want)
    record(4, bad == 0, f"{bad} of 20 models disagree", start, 120)


def _partition_faults(model, land, phi, cycles):
    faults = 0
    idx = {s: i for i, s in enumerate(model.states)}
    for k in range(1, min(model.n - 1, 6) + 1):
        for dom in itertools.combinations(model.states, k):
            dset = frozenset(dom)
            parts = [p.members for p in maximal_partition(land, dom)]
            faults += sum(len(p) for p in parts) != len(dom) or frozenset().union(*parts) != dset
            faults += any(p not in cycles for p in parts)
            # no cycle inside D strictly contains an element
            faults += any(p < c <= dset for p in parts for c in cycles)
            for r in range(2, len(parts) + 1):
                for group in itertools.combinations(parts, r):
                    union = frozenset().union(*group)
                    faults += oracles.is_energy_cycle(phi, {idx[s] for s in union}, model.n)
    return faults


def _cycle_law_faults(model, land, phi, cycles):
    faults = 0
    h = land.h
    levels = stability_levels(land)
    for c in cycles:
        if len(c) == model.n:
            continue
        inside = [model.index(s) for s in c]
        outside = [i for i in range(model.n) if i not in inside]
        low = min(h[i] for i in inside)
        exit_level = min(phi[i][j] for i in inside for j in outside)
        gamma = exit_level - low
        for i in inside:
            v = levels[model.states[i]].level
            faults += (v >= gamma) if h[i] > low else (v < gamma)
        costs = exit_costs(land, c)
        for j in outside:
            step = min(h[i] + model.delta[i][j] for i in inside)
            want = INF if step == INF else step - exit_level
            faults += costs[model.states[j]] != want
    return faults


def test_partitions_and_cycle_laws():
    start = time.perf_counter()
    models = desk_models() + seeded(irreducible, 20, seed=1005, max_states=7)
    faults = 0
    for model in models:
        land = Landscape(model)
        phi = oracles.heights(model, land.h)
        cycles = oracles.all_cycles(model, phi)
        faults += _partition_faults(model, land, phi, cycles)
        faults += _cycle_law_faults(model, land, phi, cycles)
    record(5, faults == 0, f"{faults} violations over {len(models)} models", start, 60)


def test_escape_time_exponent():
    start = time.perf_counter()
    well = desk.well()
    betas = (4, 6, 8)
    exact = ols_slope(betas, [math.log(expected_hitting_solve(well, b, "c", ["a"])) for b in betas])
    report = experiment_escape_scaling(well, "c", betas=(2, 3, 4), replicas=500, master_seed=6)
    _REPORTS[6] = report
    sim = report.fitted["sim_slope"]
    ok = 2.8 <= exact <= 3.2 and 2.6 <= sim <= 3.4
    record(6, ok, f"exact slope {exact:.3f}, simulated slope {sim:.3f}", start, 120)


def test_exponential_law():
    start = time.perf_counter()
    report = experiment_exponential_law(desk.well(), "c", beta=4, replicas=2000, master_seed=7)
    _REPORTS[7] = report
    ks, ratio = report.fitted["ks_distance"], report.fitted["mean_over_t_beta"]
    ok = ks <= 0.08 and 0.8 <= ratio <= 1.25
    record(7, ok, f"KS {ks:.4f}, mean/T_beta {ratio:.3f}", start, 120)


def test_gate_crossing():
    start = time.perf_counter()
    model = desk.two_routes()
    report = experiment_gate_crossing(model, "x", "y", betas=(4, 6, 8), replicas=2000, master_seed=8)
    _REPORTS[8] = report
    freqs = [report.value("frequency_y_before_gate", b) for b in (4, 6, 8)]
    exact = [report.value("exact_probability", b) for b in (4, 6, 8)]
    ok = all(report.checks.values())
    record(8, ok, f"gate {report.parameters['gate']}: frequencies {freqs}, exact "
           + ", ".join(f"{p:.4f}" for p in exact), start, 120)


def test_tube_and_exit_distribution():
    start = time.perf_counter()
    spur = desk.well_with_spur()
    exits = experiment_exit_distribution(spur, ["c", "d", "e"], "c", betas=(1, 1.5, 2),
                                         replicas=1000, master_seed=9)
    tube = experiment_tube_probability(spur, "c", "a", betas=(3, 5), replicas=1000, master_seed=9)
    _REPORTS["9-exit"] = exits
    _REPORTS["9-tube"] = tube
    exponent = exits.fitted["exit_exponent[f]"]
    miss = tube.value("non_member_fraction", 5)
    ok = 3.5 <= exponent <= 4.5 and miss <= 0.1
    record(9, ok, f"exit exponent at f {exponent:.3f}, tube non-membership at beta=5 {miss}", start, 120)


def test_recurrence():
    start = time.perf_counter()
    report = experiment_recurrence(desk.well(), 1, epsilon=0.5, betas=(5,), replicas=1000, master_seed=10)
    _REPORTS[10] = report
    worst = report.value("max_exceed", 5)
    exact = report.value("exact_max_exceed", 5)
    record(10, worst <= 0.05, f"max exceedance {worst:.3f} (exact {exact:.4f})", start, 120)


def test_reconstruction():
    start = time.perf_counter()
    bad = 0
    for model, _ in seeded(weakly_reversible, 50, seed=1011):
        u = reconstruct_potential(model).h
        bad += u != virtual_energy(model).h
        # potential differences must match every two-way edge, so every cycle closes
        bad += any(
            u[y] - u[x] != model.delta[x][y] - model.delta[y][x]
            for x in range(model.n) for y in model.successors(x)
        )
    record(11, bad == 0, f"{bad} failures over 50 models", start, 30)


def test_replay_is_bit_exact():
    start = time.perf_counter()
    well = desk.well()
    runs = dict(_REPORTS)
    for key, make in {
        6: lambda: experiment_escape_scaling(well, "c", betas=(2, 3), replicas=200, master_seed=6),
        7: lambda: experiment_exponential_law(well, "c", beta=3, replicas=300, master_seed=7),
        8: lambda: experiment_gate_crossing(desk.two_routes(), "x", "y", betas=(2, 3), replicas=200,
                                            master_seed=8),
        "9-exit": lambda: experiment_exit_distribution(desk.well_with_spur(), ["c", "d", "e"], "c",
                                                       replicas=200, master_seed=9),
        "9-tube": lambda: experiment_tube_probability(desk.well_with_spur(), "c", "a", betas=(3,),
                                                      replicas=200, master_seed=9),
        10: lambda: experiment_recurrence(well, 1, betas=(3,), replicas=200, master_seed=10),
    }.items():
        runs.setdefault(key, make())
    runs["excursion"] = experiment_excursion(well, "c", 3, 1.0, 6, replicas=300, master_seed=12,
                                             cycle_members=["c", "d", "e"])
    models = {8: desk.two_routes(), "9-exit": desk.well_with_spur(), "9-tube": desk.well_with_spur()}
    differ = []
    for key, report in runs.items():
        again = replay(report, models.get(key, well))
        same = again.rows == report.rows and again.status == report.status and all(
            (isinstance(a, float) and math.isnan(a) and math.isnan(b)) or a == b
            for a, b in zip(again.fitted.values(), report.fitted.values())
        )
        if not same:
            differ.append(str(key))
    record(12, not differ, f"{len(runs)} experiments replayed, differing: {differ or 'none'}", start, None)
