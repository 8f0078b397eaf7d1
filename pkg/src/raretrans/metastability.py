"""Stability levels, metastable sets, saddles and gates."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from raretrans.cycles import Cycle, CycleTree, cycle_tree, max_strict_subcycles
from raretrans.landscape import Landscape, PathRecord
from raretrans.model import INF, Rate

PATH_CAP = 10**6
TRANSVERSAL_CAP = 10**5


class CapExceededError(RuntimeError):
    pass


@dataclass(frozen=True)
class StabilityRecord:
    state: str
    below_set: frozenset[str]
    level: Rate


@dataclass(frozen=True)
class MetaSets:
    stable: frozenset[str]
    vmax: Rate | None
    metastable: frozenset[str]
    level_sets: dict = field(default_factory=dict)
    note: str | None = None


def stability_levels(land: Landscape) -> dict[str, StabilityRecord]:
    out = {}
    for x in range(land.n):
        below = [y for y in range(land.n) if land.h[y] < land.h[x]]
        level = land.phi_sets([x], below) - land.h[x] if below else INF
        out[land.states[x]] = StabilityRecord(land.states[x], land.model.labels(below), level)
    return out


def meta_sets(records: dict[str, StabilityRecord], levels: Iterable = ()) -> MetaSets:
    stable = frozenset(s for s, r in records.items() if r.level == INF)
    finite = [r.level for r in records.values() if r.level != INF]
    level_sets = {
        a: frozenset(s for s, r in records.items() if r.level > a) for a in levels
    }
    if not finite:
        return MetaSets(stable, None, frozenset(), level_sets,
                        note="every state is a ground state; no metastable level")
    vmax = max(finite)
    meta = frozenset(s for s, r in records.items() if r.level == vmax)
    return MetaSets(stable, vmax, meta, level_sets)


def _pair(land: Landscape, x, y) -> tuple[int, int]:
    xi, yi = land.model.index(x), land.model.index(y)
    if xi == yi:
        raise ValueError("pair must consist of two distinct states")
    return xi, yi


def enclosing_cycle(land: Landscape, x, y, tree: CycleTree | None = None) -> Cycle:
    """Smallest cycle holding x and y, found two ways and cross-checked."""
    xi, yi = _pair(land, x, y)
    tree = tree or cycle_tree(land)
    from_tree = tree.smallest_containing({xi, yi})

    level = land.phi[xi][yi]
    above = sorted({v for row in land.phi for v in row if v != INF and v > level})
    slack = (above[0] - level) / 2 if above else Fraction(1)
    by_gap = frozenset(u for u in range(land.n) if land.phi[xi][u] < level + slack)
    if by_gap != from_tree.indices:
        raise AssertionError(
            f"enclosing cycle mismatch: {sorted(by_gap)} vs {sorted(from_tree.indices)}"
        )
    return from_tree


def _decomposition(land: Landscape, x, y) -> tuple[Cycle, list[Cycle]]:
    enclosing = enclosing_cycle(land, x, y)
    return enclosing, max_strict_subcycles(land, enclosing)


def saddles(land: Landscape, x, y) -> frozenset[str]:
    _, parts = _decomposition(land, x, y)
    return frozenset().union(*(c.principal_boundary for c in parts))


def _optimal_paths(land: Landscape, xi: int, yi: int, cap: int) -> tuple[list[list[int]], bool]:
    target = land.phi[xi][yi]
    model, h = land.model, land.h
    found: list[list[int]] = []
    path = [xi]
    on_path = {xi}

    def walk(u: int) -> bool:
        for v in model.successors(u):
            if v in on_path or h[u] + model.delta[u][v] > target:
                continue
            if v == yi:
                found.append(path + [v])
                if len(found) >= cap:
                    return True
                continue
            path.append(v)
            on_path.add(v)
            stop = walk(v)
            path.pop()
            on_path.discard(v)
            if stop:
                return True
        return False

    truncated = walk(xi)
    return found, truncated


def optimal_paths(land: Landscape, x, y, *, cap: int = PATH_CAP) -> list[PathRecord]:
    """Every simple path from x to y whose elevation equals ``Phi(x, y)``.

    Cutting a loop out of a path never raises its elevation, so the simple
    optimal paths carry all the information gates need.
    """
    xi, yi = _pair(land, x, y)
    found, truncated = _optimal_paths(land, xi, yi, cap)
    if truncated:
        raise CapExceededError(f"more than {cap} optimal paths")
    level = land.phi[xi][yi]
    return [PathRecord(tuple(land.states[i] for i in p), level) for p in found]


def minimal_transversals(
    traces: Iterable[Iterable], *, cap: int = TRANSVERSAL_CAP
) -> tuple[list[frozenset], bool]:
    """All inclusion-minimal sets meeting every trace, built edge by edge.

    Returns ``(transversals, truncated)``. An empty trace has no
    transversal, so the result is then empty.
    """
    edges = []
    for t in traces:
        t = frozenset(t)
        if not t:
            return [], False
        edges.append(t)
    # Superset edges add no constraint.
    edges = [e for e in set(edges) if not any(f < e for f in edges)]
    edges.sort(key=lambda e: (len(e), sorted(map(str, e))))
    current: set[frozenset] = {frozenset()}
    truncated = False
    for e in edges:
        grown = set()
        for t in current:
            if t & e:
                grown.add(t)
            else:
                grown.update(t | {v} for v in e)
        current = {t for t in grown if not any(o < t for o in grown)}
        if len(current) > cap:
            truncated = True
            current = set(sorted(current, key=lambda t: (len(t), sorted(map(str, t))))[:cap])
    ordered = sorted(current, key=lambda t: (len(t), sorted(map(str, t))))
    return ordered, truncated


@dataclass(frozen=True)
class GateAnalysis:
    pair: tuple[str, str]
    enclosing_cycle: Cycle
    decomposition: tuple[Cycle, ...]
    saddles: frozenset[str]
    optimal_paths: tuple[PathRecord, ...]
    minimal_gates: tuple[frozenset[str], ...]
    gate_union: frozenset[str]
    truncated: bool = False


def gate_analysis(
    land: Landscape,
    x,
    y,
    *,
    include_endpoints: bool = False,
    path_cap: int = PATH_CAP,
    transversal_cap: int = TRANSVERSAL_CAP,
) -> GateAnalysis:
    """Saddles, optimal paths and minimal gates for the pair (x, y).

    Traces are optimal paths cut down to the saddle set; with the default
    ``include_endpoints=False`` the endpoints never count as gate states.
    """
    xi, yi = _pair(land, x, y)
    enclosing, parts = _decomposition(land, x, y)
    saddle_set = frozenset().union(*(c.principal_boundary for c in parts))
    saddle_idx = land.model.indices(saddle_set)
    found, paths_cut = _optimal_paths(land, xi, yi, path_cap)
    traces = []
    for p in found:
        trace = set(p) & saddle_idx
        if not include_endpoints:
            trace -= {xi, yi}
        traces.append(trace)
    gates, gates_cut = minimal_transversals(traces, cap=transversal_cap)
    gates = [land.model.labels(g) for g in gates]
    gates.sort(key=lambda g: (len(g), sorted(g)))
    level = land.phi[xi][yi]
    return GateAnalysis(
        pair=(land.states[xi], land.states[yi]),
        enclosing_cycle=enclosing,
        decomposition=tuple(parts),
        saddles=saddle_set,
        optimal_paths=tuple(PathRecord(tuple(land.states[i] for i in p), level) for p in found),
        minimal_gates=tuple(gates),
        gate_union=frozenset().union(*gates),
        truncated=paths_cut or gates_cut,
    )


def minimal_gates(land: Landscape, x, y, **options) -> tuple[list[frozenset[str]], frozenset[str]]:
    result = gate_analysis(land, x, y, **options)
    return list(result.minimal_gates), result.gate_union


@dataclass(frozen=True)
class TubeVerdict:
    member: bool
    clause: str | None = None
    step: int | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.member


class TubeChecker:
    """Reusable membership test for one pair; avoids recomputing cycles."""

    def __init__(self, land: Landscape, x, y):
        self.land = land
        self.x, self.y = _pair(land, x, y)
        enclosing, parts = _decomposition(land, x, y)
        self.enclosing = enclosing.indices
        self.parts = parts
        self.owner = {i: k for k, c in enumerate(parts) for i in c.indices}
        self.boundary = [land.model.indices(c.principal_boundary) for c in parts]
        self.target_part = self.owner[self.y]

    def __call__(self, trajectory: Sequence) -> TubeVerdict:
        model = self.land.model
        idx = [model.index(s) for s in trajectory]
        if not idx or idx[0] != self.x:
            raise ValueError("trajectory must start at x")
        entered = self.owner[self.x] == self.target_part
        for k, (u, v) in enumerate(zip(idx, idx[1:]), start=1):
            if u == v:
                continue  # lazy step
            if model.delta[u][v] == INF:
                raise ValueError(f"infinite-rate step {model.states[u]}->{model.states[v]}")
            part = self.owner.get(u)
            if v not in self.parts[part].indices and v not in self.boundary[part]:
                return TubeVerdict(False, "ii", k,
                                   f"left {sorted(self.parts[part].members)} at {model.states[v]}")
            if v not in self.enclosing:
                return TubeVerdict(False, "i", k, f"left the enclosing cycle at {model.states[v]}")
            if v == self.y:
                return TubeVerdict(True)
            inside = self.owner[v] == self.target_part
            if entered and not inside:
                return TubeVerdict(False, "iii", k, f"left the target's cycle at {model.states[v]}")
            entered = entered or inside
        return TubeVerdict(False, "i", None, "never reached y")


def tube_membership(land: Landscape, trajectory: Sequence, x, y) -> TubeVerdict:
    return TubeChecker(land, x, y)(trajectory)
