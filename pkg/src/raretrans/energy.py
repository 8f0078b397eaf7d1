"""Virtual energy from arborescence (in-forest) costs, and its oracles.

``G(A)`` is the set of spanning in-forests with roots ``A``: every state
outside ``A`` has exactly one out-edge, nothing leaves ``A`` and following
edges from anywhere ends in ``A``. Minimum costs over ``G(A)`` come from an
Edmonds-style contraction run on exact rationals with a super-root attached
to every member of ``A``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

from raretrans.chain import (
    _check_can_leave,
    absorption_probabilities_mp,
    hitting_times_mp,
    ols_slope,
    stationary_solve,
)
from raretrans.model import INF, Model, ModelError, Rate, check_irreducible

BRUTE_FORCE_CAP = 12


class NoArborescenceError(ValueError):
    """Some state cannot reach the root set through finite rates."""


@dataclass(frozen=True)
class EnergyTable:
    states: tuple[str, ...]
    h: tuple[Fraction, ...]

    def __getitem__(self, state: str) -> Fraction:
        return self.h[self.states.index(state)]

    def as_dict(self) -> dict[str, Fraction]:
        return dict(zip(self.states, self.h))


@dataclass(frozen=True)
class Arborescence:
    roots: frozenset[str]
    parent: dict[str, str]
    total_cost: Rate

    def edges(self) -> list[tuple[str, str]]:
        return sorted(self.parent.items())


@dataclass
class ExitExponents:
    gamma: Rate
    delta_exit: dict[str, Rate]
    oracle_gamma: float | None = None
    oracle_delta_exit: dict[str, float] = field(default_factory=dict)
    agrees: bool | None = None


# --- minimum in-forests ----------------------------------------------------

def _find_cycle(best: dict[int, tuple], root: int) -> list[int] | None:
    state: dict[int, int] = {}
    for start in sorted(best):
        if start in state:
            continue
        trail = []
        u = start
        while u != root and u not in state:
            state[u] = 1
            trail.append(u)
            u = best[u][1]
        if u != root and state.get(u) == 1 and u in trail:
            return trail[trail.index(u):]
        for v in trail:
            state[v] = 2
    return None


def _edmonds(nodes: list[int], edges: list[tuple], root: int) -> dict[int, tuple]:
    """Cheapest out-edge choice per non-root node forming a tree into ``root``.

    Edges are ``(u, v, weight, parent_edge)`` where ``parent_edge`` links a
    contracted edge to the edge it stands for one level up.
    """
    best: dict[int, tuple] = {}
    for e in edges:
        u, v, w = e[0], e[1], e[2]
        if u == root or u == v:
            continue
        if u not in best or w < best[u][2]:
            best[u] = e
    missing = [u for u in nodes if u != root and u not in best]
    if missing:
        raise NoArborescenceError(missing)
    cycle = _find_cycle(best, root)
    if cycle is None:
        return best
    members = set(cycle)
    c = max(nodes) + 1
    new_nodes = [u for u in nodes if u not in members] + [c]
    new_edges = []
    for e in edges:
        u, v, w = e[0], e[1], e[2]
        if u in members and v in members:
            continue
        if u in members:
            new_edges.append((c, v, w - best[u][2], e))
        elif v in members:
            new_edges.append((u, c, w, e))
        else:
            new_edges.append((u, v, w, e))
    chosen = {}
    for u, sub_edge in _edmonds(new_nodes, new_edges, root).items():
        edge = sub_edge[3]
        chosen[edge[0]] = edge
    for u in cycle:
        chosen.setdefault(u, best[u])
    return chosen


def min_forest(delta: Sequence[Sequence[Rate]], roots: Iterable[int]) -> tuple[Rate, dict[int, int]]:
    """Minimum total rate over ``G(roots)`` and a minimizing parent map."""
    n = len(delta)
    roots = set(roots)
    if not roots:
        raise ValueError("root set must be nonempty")
    super_root = n
    edges = [(a, super_root, Fraction(0), None) for a in sorted(roots)]
    for u in range(n):
        if u in roots:
            continue
        for v in range(n):
            r = delta[u][v]
            if u != v and r != INF:
                edges.append((u, v, r, None))
    nodes = list(range(n + 1))
    try:
        chosen = _edmonds(nodes, edges, super_root)
    except NoArborescenceError as exc:
        raise NoArborescenceError(
            f"states {sorted(exc.args[0])} cannot reach the roots"
        ) from None
    parent = {u: e[1] for u, e in chosen.items() if u not in roots}
    cost = sum((delta[u][v] for u, v in parent.items()), Fraction(0))
    return cost, parent


def min_forest_through(
    delta: Sequence[Sequence[Rate]], roots: Iterable[int], x: int, y: int
) -> Rate:
    """Minimum over ``G_{x,y}(roots)``: forests in which x drains into root y.

    Such a forest is a simple path ``x -> ... -> y`` through non-roots plus a
    free forest on the rest rooted at ``roots`` and the path, so the minimum
    is taken over paths with the unconstrained minimum for the remainder.
    Returns ``INF`` when no such forest exists.
    """
    n = len(delta)
    roots = frozenset(roots)
    if y not in roots or x in roots:
        raise ValueError("need x outside the roots and y among them")
    if n > BRUTE_FORCE_CAP:
        raise ValueError(f"constrained minimum refused above {BRUTE_FORCE_CAP} states")
    best: list[Rate] = [INF]

    def rest_cost(path_nodes: frozenset[int]) -> Rate:
        try:
            cost, _ = min_forest(delta, roots | path_nodes)
        except NoArborescenceError:
            return INF
        return cost

    def extend(u: int, visited: frozenset[int], cost: Rate) -> None:
        if cost >= best[0]:
            return
        for v in range(n):
            r = delta[u][v]
            if v == u or r == INF or v in visited:
                continue
            if v == y:
                total = cost + r + rest_cost(visited)
                if total < best[0]:
                    best[0] = total
            elif v not in roots:
                extend(v, visited | {v}, cost + r)

    extend(x, frozenset({x}), Fraction(0))
    return best[0]


def min_arborescence(model: Model, roots) -> Arborescence:
    root_idx = model.indices(roots)
    if not root_idx:
        raise ValueError("root set must be nonempty")
    cost, parent = min_forest(model.delta, root_idx)
    return Arborescence(
        roots=model.labels(root_idx),
        parent={model.states[u]: model.states[v] for u, v in parent.items()},
        total_cost=cost,
    )


def virtual_energy(model: Model) -> EnergyTable:
    report = check_irreducible(model)
    if not report.irreducible:
        raise ModelError("virtual energy needs an irreducible model")
    costs = [min_forest(model.delta, {x})[0] for x in range(model.n)]
    low = min(costs)
    return EnergyTable(model.states, tuple(c - low for c in costs))


# --- exit exponents ---------------------------------------------------------

def exit_exponent_oracle(model: Model, domain, x, betas: Sequence[float]):
    """Finite-beta estimates of the exit-time and exit-location exponents.

    For each beta the absorbing chain on the complement of ``domain`` is
    solved exactly; the exponents are least-squares slopes of
    ``log E[tau]`` and ``-log P[exit at y]`` against beta.
    """
    if len(betas) < 2:
        raise ValueError("slope fit needs at least two beta values")
    dom = model.indices(domain)
    xi = model.index(x)
    if xi not in dom:
        raise ValueError("start state must lie in the domain")
    outside = [i for i in range(model.n) if i not in dom]
    if not outside:
        raise ValueError("domain has no exterior")
    _check_can_leave(model, set(outside))
    log_tau = []
    log_exit: dict[int, list] = {y: [] for y in outside}
    for beta in betas:
        tau = hitting_times_mp(model, beta, outside)[xi]
        log_tau.append(float(mpmath.log(tau)))
        probs = absorption_probabilities_mp(model, beta, outside)[xi]
        for y in outside:
            p = probs[y]
            log_exit[y].append(-float(mpmath.log(p)) if p > 0 else math.inf)
    gamma = ols_slope(betas, log_tau)
    delta_exit = {}
    for y, values in log_exit.items():
        if any(math.isinf(v) for v in values):
            delta_exit[model.states[y]] = math.inf
        else:
            delta_exit[model.states[y]] = ols_slope(betas, values)
    return gamma, delta_exit


def exit_exponents_graph(
    model: Model,
    energy: EnergyTable | None,
    domain,
    x,
    *,
    betas: Sequence[float] = (4, 6, 8),
    tol: float = 0.25,
    check: bool = True,
) -> ExitExponents:
    """Exit-time and exit-location exponents of ``domain`` from graph minima.

    The time exponent is

        min G(X\\D) - min_{x' in D} min G_{x,x'}((X\\D) + {x'})

    where the ``x' == x`` term is the plain minimum over ``G((X\\D) + {x})``.
    With ``check`` the values are compared with :func:`exit_exponent_oracle`
    and ``agrees`` records whether every finite exponent matched within
    ``tol``.
    """
    del energy  # graph formulas only need the rates
    dom = model.indices(domain)
    xi = model.index(x)
    if xi not in dom:
        raise ValueError("start state must lie in the domain")
    outside = frozenset(i for i in range(model.n) if i not in dom)
    if not outside:
        raise ValueError("domain has no exterior")
    if model.n > BRUTE_FORCE_CAP:
        raise ValueError(f"graph exponents refused above {BRUTE_FORCE_CAP} states")
    try:
        base, _ = min_forest(model.delta, outside)
    except NoArborescenceError:
        raise ValueError("some state of the domain cannot reach its exterior") from None

    delta_exit: dict[str, Rate] = {}
    for y in sorted(outside):
        through = min_forest_through(model.delta, outside, xi, y)
        delta_exit[model.states[y]] = through - base if through != INF else INF

    second: Rate = INF
    for xp in sorted(dom):
        roots = outside | {xp}
        if xp == xi:
            cost, _ = min_forest(model.delta, roots)
        else:
            cost = min_forest_through(model.delta, roots, xi, xp)
        second = min(second, cost)
    gamma = base - second

    result = ExitExponents(gamma, delta_exit)
    if check:
        og, od = exit_exponent_oracle(model, model.labels(dom), model.states[xi], betas)
        result.oracle_gamma = og
        result.oracle_delta_exit = od
        agree = abs(og - float(gamma)) <= tol
        for label, value in delta_exit.items():
            if value == INF:
                agree &= math.isinf(od[label])
            else:
                agree &= not math.isinf(od[label]) and abs(od[label] - float(value)) <= tol
        result.agrees = agree
    return result


# --- stepwise reconstruction for potential-induced rates -------------------

class PathDependenceError(ValueError):
    """The stepwise potential differs along two paths (offending cycle attached)."""

    def __init__(self, message: str, cycle: list[str]):
        super().__init__(message)
        self.cycle = cycle


def reconstruct_potential(model: Model) -> EnergyTable:
    """Potential built by summing ``delta(u, v) - delta(v, u)`` along paths.

    Requires ``delta(x, y) < inf`` iff ``delta(y, x) < inf``. The reference
    state is the first declared one. Every non-tree edge of a BFS spanning
    tree closes one fundamental cycle; each is checked for consistency.
    """
    n = model.n
    d = model.delta
    for i in range(n):
        for j in range(n):
            if i != j and (d[i][j] == INF) != (d[j][i] == INF):
                raise ModelError(
                    f"support symmetry violated: {model.states[i]}->{model.states[j]}"
                )
    if not check_irreducible(model).irreducible:
        raise ModelError("potential reconstruction needs an irreducible model")
    w: dict[int, Fraction] = {0: Fraction(0)}
    parent: dict[int, int | None] = {0: None}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in model.successors(u):
            if v not in w:
                w[v] = w[u] + d[u][v] - d[v][u]
                parent[v] = u
                queue.append(v)
    for u in range(n):
        for v in model.successors(u):
            if u < v and parent.get(v) != u and parent.get(u) != v:
                if w[v] - w[u] != d[u][v] - d[v][u]:
                    raise PathDependenceError(
                        f"potential depends on the path around edge "
                        f"{model.states[u]}-{model.states[v]}",
                        _tree_cycle(model, parent, u, v),
                    )
    low = min(w.values())
    return EnergyTable(model.states, tuple(w[i] - low for i in range(n)))


def _tree_cycle(model: Model, parent: dict[int, int | None], u: int, v: int) -> list[str]:
    def chain(a):
        out = [a]
        while parent[a] is not None:
            a = parent[a]
            out.append(a)
        return out

    up, vp = chain(u), chain(v)
    common = next(a for a in up if a in set(vp))
    left = up[: up.index(common) + 1]
    right = vp[: vp.index(common)]
    return [model.states[a] for a in left + right[::-1] + [u]][::-1]


def energy_slope_estimate(model: Model, betas: Sequence[float] = (5, 10, 20)) -> list[float]:
    """Per-state slope of ``-log mu_beta(x)`` against beta from exact solves."""
    logs = []
    for beta in betas:
        mu = stationary_solve(model, beta, as_mp=True)
        logs.append([-float(mpmath.log(m)) for m in mu])
    return [ols_slope(betas, [row[i] for row in logs]) for i in range(model.n)]
