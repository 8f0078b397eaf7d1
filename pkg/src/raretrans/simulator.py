"""Sampling the finite-beta chain and the experiment suite built on it.

Trajectories are simulated as a jump chain: the lazy holding time at a state
with leaving probability ``q`` is geometric and drawn by inversion, so each
jump costs one or two uniforms no matter how sticky the chain is. Step
counts are exactly those of the lazy chain.

Each replica owns a ``random.Random`` seeded from
``SeedSequence([master, group, replica])``; the seeds are stored in every
report so a run can be replayed without the master seed.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
import random
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats
from statsmodels.stats.proportion import proportion_confint

from raretrans.chain import (
    absorption_probabilities_mp,
    exit_distribution_solve,
    expected_hitting_solve,
    ols_slope,
    transition_matrix,
)
from raretrans.cycles import cycle, exit_costs
from raretrans.landscape import Landscape
from raretrans.metastability import TubeChecker, gate_analysis, meta_sets, stability_levels
from raretrans.model import INF, Model, parse_number

MAX_STEP_CAP = 10**9
NO_CAP = math.inf  # absorption experiments always terminate
MIN_REPLICAS = 100


@dataclass(frozen=True)
class ChainConfig:
    beta: float
    seed: int
    step_cap: int = MAX_STEP_CAP

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.step_cap <= 0:
            raise ValueError("step_cap must be positive")


@dataclass(frozen=True)
class HittingSample:
    start: str
    target: frozenset[str]
    steps: int | None  # None when timed out
    exit_state: str | None
    path: tuple[str, ...] | None = None

    @property
    def timed_out(self) -> bool:
        return self.steps is None


class JumpChain:
    """Precomputed jump probabilities and leave rates of the lazy chain."""

    def __init__(self, model: Model, beta: float):
        self.model = model
        p = transition_matrix(model, beta).p
        self.leave = []
        self.log_stay = []
        self.succ = []
        self.cum = []
        for i in range(model.n):
            targets = [j for j in model.successors(i) if p[i, j] > 0]
            weights = np.array([p[i, j] for j in targets])
            q = float(weights.sum())
            self.leave.append(q)
            self.log_stay.append(math.log1p(-q) if q > 0 else 0.0)
            self.succ.append(targets)
            c = np.cumsum(weights) / q if q > 0 else np.array([])
            if len(c):
                c[-1] = 1.0
            self.cum.append(c.tolist())

    def run(
        self,
        rng: random.Random,
        start: int,
        stop: Callable[[int], bool],
        step_cap: int,
        *,
        on_jump: Callable[[int, int, int], bool] | None = None,
    ) -> tuple[int | None, int, list[int]]:
        """Advance until ``stop(state)``; returns (steps or None, state, jumps).

        ``on_jump(u, v, steps)`` may return True to halt early (the result
        then reports the steps so far). Jumps are recorded as visited states.
        """
        state = start
        steps = 0
        visited = [start]
        while not stop(state):
            q = self.leave[state]
            if q == 0:
                return None, state, visited
            u = 1.0 - rng.random()
            hold = 1 + int(math.log(u) / self.log_stay[state]) if q < 1 else 1
            steps += hold
            if steps > step_cap:
                return None, state, visited
            k = bisect.bisect_left(self.cum[state], rng.random())
            nxt = self.succ[state][min(k, len(self.succ[state]) - 1)]
            visited.append(nxt)
            if on_jump is not None and on_jump(state, nxt, steps):
                return steps, nxt, visited
            state = nxt
        return steps, state, visited


def sample_hitting(model: Model, config: ChainConfig, start, target, *, keep_path: bool = False) -> HittingSample:
    tgt = model.indices(target)
    if not tgt:
        raise ValueError("target must be nonempty")
    chain = JumpChain(model, config.beta)
    steps, end, visited = chain.run(
        random.Random(config.seed), model.index(start), tgt.__contains__, config.step_cap
    )
    return HittingSample(
        start=model.states[model.index(start)],
        target=model.labels(tgt),
        steps=steps,
        exit_state=model.states[end] if steps is not None else None,
        path=tuple(model.states[i] for i in visited) if keep_path else None,
    )


def replica_seeds(master: int, group: int, count: int) -> list[int]:
    return [
        int(np.random.SeedSequence([master, group, r]).generate_state(1, np.uint64)[0])
        for r in range(count)
    ]


class SeedPlan:
    """Hands out replica seeds per group, derived or replayed from a table."""

    def __init__(self, master: int, table: dict[str, list[int]] | None = None):
        if not 0 <= master < 2**64:
            raise ValueError("master seed must be an unsigned 64-bit integer")
        self.master = master
        self.replay = table is not None
        self.table: dict[str, list[int]] = dict(table or {})
        self._group = 0

    def seeds(self, key: str, count: int) -> list[int]:
        self._group += 1
        if self.replay:
            return list(self.table[key])
        seeds = replica_seeds(self.master, self._group, count)
        self.table[key] = seeds
        return seeds


@dataclass(frozen=True)
class Row:
    beta: float
    statistic: str
    value: float
    stderr: float | None = None


@dataclass
class ExperimentReport:
    name: str
    parameters: dict
    master_seed: int
    seeds: dict[str, list[int]]
    rows: list[Row]
    fitted: dict[str, float] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    status: str = "pass"
    warnings: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def value(self, statistic: str, beta: float | None = None) -> float:
        for r in self.rows:
            if r.statistic == statistic and (beta is None or r.beta == beta):
                return r.value
        raise KeyError((statistic, beta))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["beta", "statistic", "value", "stderr"])
        for r in self.rows:
            writer.writerow([repr(r.beta), r.statistic, repr(r.value),
                             "" if r.stderr is None else repr(r.stderr)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _finish(report: ExperimentReport, replicas: int) -> ExperimentReport:
    if replicas < MIN_REPLICAS:
        report.status = "inconclusive"
        report.warnings.append(f"{replicas} replicas is too few for a verdict (need {MIN_REPLICAS})")
    elif not all(report.checks.values()):
        report.status = "fail"
    return report


def _stable_set(land: Landscape) -> tuple[frozenset[int], object]:
    meta = meta_sets(stability_levels(land))
    return land.model.indices(meta.stable), meta.vmax


def default_step_cap(beta: float, vmax) -> int:
    height = float(vmax) if vmax is not None and vmax != INF else 0.0
    exponent = beta * (height + 1) + math.log(100)
    if exponent >= math.log(MAX_STEP_CAP):
        return MAX_STEP_CAP
    return min(MAX_STEP_CAP, math.ceil(math.exp(exponent)))


def _mean_se(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else math.inf
    return float(arr.mean()), se


def _binomial_se(p: float, n: int) -> float:
    return max(math.sqrt(max(p * (1 - p), 0.0) / n), 1.0 / n)


def _hits(model, chain, seeds, start, stop, cap, **kw):
    out = []
    for s in seeds:
        out.append(chain.run(random.Random(s), start, stop, cap, **kw))
    return out


# --- experiments --------------------------------------------------------------

def experiment_escape_scaling(
    model: Model,
    x_start,
    betas: Sequence[float] = (2, 3, 4),
    replicas: int = 500,
    master_seed: int = 0,
    *,
    epsilon: float = 0.5,
    tolerance: float = 0.4,
    step_cap: int | None = None,
    seed_table: dict | None = None,
) -> ExperimentReport:
    """Mean escape time to the ground states against beta, simulated and solved."""
    land = Landscape(model)
    ground, vmax = _stable_set(land)
    x = model.index(x_start)
    plan = SeedPlan(master_seed, seed_table)
    rows: list[Row] = []
    sim_means, exact = [], []
    agree = True
    timeouts = 0
    height = float(vmax) if vmax is not None else 0.0
    for beta in betas:
        cap = step_cap or default_step_cap(beta, vmax)
        chain = JumpChain(model, beta)
        results = _hits(model, chain, plan.seeds(f"beta={beta!r}", replicas), x, ground.__contains__, cap)
        times = [s for s, _, _ in results if s is not None]
        timeouts += replicas - len(times)
        mean, se = _mean_se(times)
        solved = expected_hitting_solve(model, beta, model.states[x], model.labels(ground))
        sim_means.append(mean)
        exact.append(solved)
        agree &= abs(mean - solved) <= 3 * se
        fast = sum(1 for s in times if s < math.exp(beta * (height - epsilon))) / replicas
        slow = (sum(1 for s in times if s > math.exp(beta * (height + epsilon))) + replicas - len(times)) / replicas
        rows += [
            Row(beta, "mean_steps", mean, se),
            Row(beta, "exact_mean_steps", solved),
            Row(beta, "p_below_lower", fast, _binomial_se(fast, replicas)),
            Row(beta, "p_above_upper", slow, _binomial_se(slow, replicas)),
            Row(beta, "timeouts", float(replicas - len(times))),
        ]
    sim_slope = ols_slope(betas, [math.log(m) for m in sim_means]) if len(betas) > 1 else math.nan
    exact_slope = ols_slope(betas, [math.log(v) for v in exact]) if len(betas) > 1 else math.nan
    expected = height if x in land.model.indices(meta_sets(stability_levels(land)).metastable) else exact_slope
    report = ExperimentReport(
        "escape-scaling",
        {"x_start": model.states[x], "betas": list(betas), "replicas": replicas,
         "epsilon": epsilon, "tolerance": tolerance, "step_cap": step_cap},
        master_seed, plan.table, rows,
        fitted={"sim_slope": sim_slope, "exact_slope": exact_slope, "expected_slope": expected},
        checks={
            "slope_within_tolerance": abs(sim_slope - expected) <= tolerance,
            "sim_matches_exact": agree,
            "no_timeouts": timeouts == 0,
        },
    )
    return _finish(report, replicas)


def experiment_exponential_law(
    model: Model,
    x0,
    beta: float = 4,
    replicas: int = 2000,
    master_seed: int = 0,
    *,
    max_ks: float = 0.08,
    ratio_range: tuple[float, float] = (0.8, 1.25),
    target=None,
    step_cap: int | None = None,
    seed_table: dict | None = None,
) -> ExperimentReport:
    """Escape time rescaled by its mean against the unit exponential law.

    ``T_beta`` is the empirical ``1 - 1/e`` quantile of the escape time.
    """
    land = Landscape(model)
    ground, vmax = _stable_set(land)
    tgt = model.indices(target) if target is not None else ground
    plan = SeedPlan(master_seed, seed_table)
    chain = JumpChain(model, beta)
    cap = step_cap or default_step_cap(beta, vmax)
    results = _hits(model, chain, plan.seeds(f"beta={beta!r}", replicas), model.index(x0), tgt.__contains__, cap)
    times = sorted(s for s, _, _ in results if s is not None)
    timeouts = replicas - len(times)
    mean, se = _mean_se(times)
    ks = float(stats.kstest(np.asarray(times) / mean, "expon").statistic)
    k = math.ceil(len(times) * (1 - math.exp(-1)))
    t_beta = float(times[max(k, 1) - 1])
    ratio = mean / t_beta
    report = ExperimentReport(
        "exponential-law",
        {"x0": model.states[model.index(x0)], "beta": beta, "replicas": replicas,
         "max_ks": max_ks, "ratio_range": list(ratio_range), "step_cap": step_cap,
         "target": sorted(model.labels(tgt))},
        master_seed, plan.table,
        [Row(beta, "mean_steps", mean, se), Row(beta, "ks_distance", ks),
         Row(beta, "t_beta", t_beta), Row(beta, "mean_over_t_beta", ratio),
         Row(beta, "timeouts", float(timeouts))],
        fitted={"ks_distance": ks, "mean_over_t_beta": ratio},
        checks={
            "ks_within_tolerance": ks <= max_ks,
            "ratio_in_range": ratio_range[0] <= ratio <= ratio_range[1],
            "no_timeouts": timeouts == 0,
        },
    )
    return _finish(report, replicas)


def experiment_gate_crossing(
    model: Model,
    x,
    y,
    gate=None,
    betas: Sequence[float] = (4, 6, 8),
    replicas: int = 2000,
    master_seed: int = 0,
    *,
    max_final: float = 0.05,
    seed_table: dict | None = None,
) -> ExperimentReport:
    """How often the chain reaches y from x without touching the gate W.

    Without an explicit gate the first computed minimal gate is used.
    """
    land = Landscape(model)
    xi, yi = model.index(x), model.index(y)
    if gate is None:
        gates = gate_analysis(land, x, y).minimal_gates
        if not gates:
            raise ValueError("the pair has no gate")
        gate = sorted(gates[0])
    w = model.indices(gate)
    stop = w | {yi}
    plan = SeedPlan(master_seed, seed_table)
    rows, freqs = [], []
    consistent = True
    for beta in betas:
        chain = JumpChain(model, beta)
        seeds = plan.seeds(f"beta={beta!r}", replicas)
        if xi in w:
            hits = 0
        else:
            results = _hits(model, chain, seeds, xi, stop.__contains__, NO_CAP)
            hits = sum(1 for s, end, _ in results if s is not None and end == yi and end not in w)
        freq = hits / replicas
        low, high = proportion_confint(hits, replicas, alpha=0.05, method="wilson")
        if xi in w or yi in w:
            exact = 0.0
        else:
            exact = float(absorption_probabilities_mp(model, beta, stop)[xi][yi])
        consistent &= abs(freq - exact) <= 3 * _binomial_se(exact, replicas)
        freqs.append(freq)
        rows += [
            Row(beta, "frequency_y_before_gate", freq, _binomial_se(freq, replicas)),
            Row(beta, "wilson_low", float(low)),
            Row(beta, "wilson_high", float(high)),
            Row(beta, "exact_probability", exact),
        ]
    decays = all(a >= b for a, b in zip(freqs, freqs[1:])) and (freqs[0] > freqs[-1] or freqs[-1] == 0)
    report = ExperimentReport(
        "gate-crossing",
        {"x": model.states[xi], "y": model.states[yi], "gate": sorted(model.labels(w)),
         "betas": list(betas), "replicas": replicas, "max_final": max_final},
        master_seed, plan.table, rows,
        checks={
            "decays_with_beta": decays,
            "final_below_threshold": freqs[-1] <= max_final,
            "consistent_with_exact": consistent,
        },
    )
    return _finish(report, replicas)


def experiment_tube_probability(
    model: Model,
    x,
    y,
    betas: Sequence[float] = (3, 5),
    replicas: int = 1000,
    master_seed: int = 0,
    *,
    max_final: float = 0.1,
    step_cap: int | None = None,
    seed_table: dict | None = None,
) -> ExperimentReport:
    """Fraction of x-to-y transitions that fall outside the tube of typical paths."""
    land = Landscape(model)
    _, vmax = _stable_set(land)
    checker = TubeChecker(land, x, y)
    xi, yi = checker.x, checker.y
    plan = SeedPlan(master_seed, seed_table)
    rows, fractions, ses = [], [], []
    clause_counts: dict[str, int] = {}
    for beta in betas:
        chain = JumpChain(model, beta)
        cap = step_cap or default_step_cap(beta, vmax)
        misses = 0
        for seed in plan.seeds(f"beta={beta!r}", replicas):
            steps, _, visited = chain.run(random.Random(seed), xi, lambda s: s == yi, cap)
            verdict = checker([model.states[i] for i in visited])
            if not verdict.member:
                misses += 1
                clause_counts[verdict.clause] = clause_counts.get(verdict.clause, 0) + 1
        frac = misses / replicas
        fractions.append(frac)
        ses.append(_binomial_se(frac, replicas))
        rows.append(Row(beta, "non_member_fraction", frac, ses[-1]))
    nonincreasing = all(b <= a + 2 * max(sa, sb)
                        for a, b, sa, sb in zip(fractions, fractions[1:], ses, ses[1:]))
    report = ExperimentReport(
        "tube-probability",
        {"x": model.states[xi], "y": model.states[yi], "betas": list(betas),
         "replicas": replicas, "max_final": max_final, "step_cap": step_cap},
        master_seed, plan.table, rows,
        fitted={f"violations_{k}": float(v) for k, v in sorted(clause_counts.items())},
        checks={"final_below_threshold": fractions[-1] <= max_final,
                "nonincreasing_in_beta": nonincreasing},
    )
    return _finish(report, replicas)


def exceed_probability(model: Model, beta: float, target: Iterable[int], horizon: int) -> list[float]:
    """``P_x[tau_target > horizon]`` for every x, by powers of the killed chain."""
    tgt = set(target)
    p = transition_matrix(model, beta).p.copy()
    for j in tgt:
        p[:, j] = 0.0
    survive = np.linalg.matrix_power(p, horizon) @ np.ones(model.n)
    for j in tgt:
        survive[j] = 0.0
    return survive.tolist()


def experiment_recurrence(
    model: Model,
    level,
    epsilon: float = 0.5,
    betas: Sequence[float] = (5,),
    replicas: int = 1000,
    master_seed: int = 0,
    *,
    max_frequency: float = 0.05,
    seed_table: dict | None = None,
) -> ExperimentReport:
    """Worst-start probability of not reaching the states above ``level`` in time."""
    land = Landscape(model)
    meta = meta_sets(stability_levels(land), [level])
    target = model.indices(meta.level_sets[level])
    plan = SeedPlan(master_seed, seed_table)
    rows, worst = [], []
    for beta in betas:
        horizon = math.floor(math.exp(beta * (float(level) + epsilon)))
        chain = JumpChain(model, beta)
        exact = exceed_probability(model, beta, target, horizon)
        freqs = []
        for x in range(model.n):
            seeds = plan.seeds(f"beta={beta!r},start={model.states[x]}", replicas)
            if x in target:
                freqs.append(0.0)
                continue
            results = _hits(model, chain, seeds, x, target.__contains__, horizon)
            freqs.append(sum(1 for s, _, _ in results if s is None) / replicas)
            rows.append(Row(beta, f"exceed[{model.states[x]}]", freqs[-1],
                            _binomial_se(freqs[-1], replicas)))
            rows.append(Row(beta, f"exact_exceed[{model.states[x]}]", exact[x]))
        worst.append(max(freqs))
        rows.append(Row(beta, "max_exceed", worst[-1]))
        rows.append(Row(beta, "exact_max_exceed", max(exact)))
    report = ExperimentReport(
        "recurrence",
        {"level": str(level), "epsilon": epsilon, "betas": list(betas), "replicas": replicas,
         "target": sorted(model.labels(target)), "max_frequency": max_frequency},
        master_seed, plan.table, rows,
        checks={"max_below_threshold": all(w <= max_frequency for w in worst)},
    )
    return _finish(report, replicas)


def experiment_excursion(
    model: Model,
    x,
    height,
    epsilon: float = 1.0,
    beta: float = 6,
    replicas: int = 1000,
    master_seed: int = 0,
    *,
    cycle_members=None,
    seed_table: dict | None = None,
) -> ExperimentReport:
    """Frequency of climbing ``height`` above ``H(x)`` early, plus the cycle variant.

    A step u -> v sits at ``H(u) + delta(u, v)``; lazy steps count at ``H(u)``.
    The early window is ``exp(beta * (height - epsilon))`` steps and the
    bound checked is ``exp(-beta * epsilon / 2)``. With ``cycle_members``
    the chain also runs from the cycle's bottom until it leaves the cycle and
    records how often it first climbs ``epsilon`` above the exit level, with
    bound ``exp(-beta * epsilon / 4)``.
    """
    land = Landscape(model)
    h = land.h
    xi = model.index(x)
    if isinstance(height, str):
        height = parse_number(height)
    ceiling = float(h[xi]) + float(height)
    window = math.floor(math.exp(beta * (float(height) - epsilon)))
    plan = SeedPlan(master_seed, seed_table)
    chain = JumpChain(model, beta)
    bound = math.exp(-beta * epsilon / 2)

    def climbs(limit):
        def hook(u, v, steps):
            return float(h[u] + model.delta[u][v]) >= limit
        return hook

    hits = 0
    for seed in plan.seeds(f"beta={beta!r}", replicas):
        steps, _, _ = chain.run(random.Random(seed), xi, lambda s: False, window, on_jump=climbs(ceiling))
        hits += steps is not None
    freq = hits / replicas
    se = _binomial_se(freq, replicas)
    rows = [Row(beta, "excursion_frequency", freq, se), Row(beta, "bound", bound)]
    checks = {"below_bound": freq <= bound + 3 * se}
    params = {"x": model.states[xi], "height": str(height), "epsilon": epsilon, "beta": beta,
              "replicas": replicas}
    if cycle_members is not None:
        c = cycle(land, cycle_members)
        inside = c.indices
        limit = float(c.exit_level) + epsilon
        start = min(i for i in inside if h[i] == c.bottom_energy)
        bound_c = math.exp(-beta * epsilon / 4)
        over = 0
        for seed in plan.seeds(f"cycle,beta={beta!r}", replicas):
            state = {"over": False}

            def hook(u, v, steps, state=state):
                if float(h[u] + model.delta[u][v]) >= limit:
                    state["over"] = True
                    return True
                return v not in inside

            chain.run(random.Random(seed), start, lambda s: False, NO_CAP, on_jump=hook)
            over += state["over"]
        freq_c = over / replicas
        se_c = _binomial_se(freq_c, replicas)
        rows += [Row(beta, "cycle_excursion_frequency", freq_c, se_c), Row(beta, "cycle_bound", bound_c)]
        checks["cycle_below_bound"] = freq_c <= bound_c + 3 * se_c
        params["cycle"] = sorted(c.members)
    report = ExperimentReport("excursion", params, master_seed, plan.table, rows, checks=checks)
    return _finish(report, replicas)


def experiment_exit_distribution(
    model: Model,
    cycle_members,
    x,
    betas: Sequence[float] = (1, 1.5, 2),
    replicas: int = 1000,
    master_seed: int = 0,
    *,
    second_start=None,
    tolerance: float = 0.5,
    seed_table: dict | None = None,
) -> ExperimentReport:
    """Where the chain leaves a cycle, simulated from two starts and solved exactly.

    Exponents ``-(1/beta) log P[exit at y]`` are fitted as slopes over the
    beta grid from the exact solves and compared with the cycle's exit costs.
    """
    land = Landscape(model)
    c = cycle(land, cycle_members)
    costs = exit_costs(land, c.members)
    inside = c.indices
    xi = model.index(x)
    if xi not in inside:
        raise ValueError("start must lie in the cycle")
    if second_start is None:
        others = sorted(inside - {xi})
        second_start = model.states[others[-1]] if others else model.states[xi]
    x2 = model.index(second_start)
    plan = SeedPlan(master_seed, seed_table)
    exterior = [y for y in range(model.n) if y not in inside]
    rows = []
    exact_logs: dict[int, list[float]] = {y: [] for y in exterior}
    same_law = True
    for beta in betas:
        chain = JumpChain(model, beta)
        exact = exit_distribution_solve(model, beta, c.members, model.states[xi])
        counts = []
        for tag, start in (("first", xi), ("second", x2)):
            seen = dict.fromkeys(exterior, 0)
            for seed in plan.seeds(f"beta={beta!r},{tag}", replicas):
                _, end, _ = chain.run(random.Random(seed), start, lambda s: s not in inside, NO_CAP)
                seen[end] += 1
            counts.append(seen)
        for y in exterior:
            label = model.states[y]
            f1, f2 = counts[0][y] / replicas, counts[1][y] / replicas
            rows.append(Row(beta, f"exit_frequency[{label}]", f1, _binomial_se(f1, replicas)))
            rows.append(Row(beta, f"exit_frequency_second[{label}]", f2, _binomial_se(f2, replicas)))
            rows.append(Row(beta, f"exact_exit_probability[{label}]", exact[label]))
            pooled = (f1 + f2) / 2
            same_law &= abs(f1 - f2) <= 3 * math.sqrt(2) * _binomial_se(pooled, replicas)
            exact_logs[y].append(-math.log(exact[label]) if exact[label] > 0 else math.inf)
    fitted, agree = {}, True
    for y in exterior:
        label = model.states[y]
        expected = costs[label]
        values = exact_logs[y]
        if expected == INF:
            agree &= all(math.isinf(v) for v in values)
            continue
        slope = ols_slope(betas, values) if len(betas) > 1 else math.nan
        fitted[f"exit_exponent[{label}]"] = slope
        agree &= abs(slope - float(expected)) <= tolerance
    report = ExperimentReport(
        "exit-distribution",
        {"cycle": sorted(c.members), "x": model.states[xi], "second_start": model.states[x2],
         "betas": list(betas), "replicas": replicas, "tolerance": tolerance},
        master_seed, plan.table, rows, fitted=fitted,
        checks={"exponents_match_exit_costs": agree, "start_independent": same_law},
    )
    return _finish(report, replicas)


EXPERIMENTS = {
    "escape-scaling": experiment_escape_scaling,
    "exponential-law": experiment_exponential_law,
    "gate-crossing": experiment_gate_crossing,
    "tube-probability": experiment_tube_probability,
    "recurrence": experiment_recurrence,
    "excursion": experiment_excursion,
    "exit-distribution": experiment_exit_distribution,
}

_POSITIONAL = {
    "escape-scaling": ["x_start"],
    "exponential-law": ["x0"],
    "gate-crossing": ["x", "y", "gate"],
    "tube-probability": ["x", "y"],
    "recurrence": ["level"],
    "excursion": ["x", "height"],
    "exit-distribution": ["cycle", "x"],
}


def replay(report: ExperimentReport, model: Model) -> ExperimentReport:
    """Re-run an experiment from the seeds stored in its report."""
    params = dict(report.parameters)
    name = report.name
    func = EXPERIMENTS[name]
    args = [model]
    for key in _POSITIONAL[name]:
        args.append(params.pop(key))
    if name == "recurrence":
        args[1] = parse_number(args[1])
        params.pop("target")
    if name == "excursion" and "cycle" in params:
        params["cycle_members"] = params.pop("cycle")
    if name == "exponential-law":
        params["ratio_range"] = tuple(params["ratio_range"])
    if "betas" in params:
        params["betas"] = tuple(params["betas"])
    return func(*args, master_seed=report.master_seed, seed_table=report.seeds, **params)
