"""The cycle hierarchy of a landscape.

Cycles are the classes of ``Phi <= v`` for realized elevations ``v``, plus
all singletons and the whole space. Every quantity attached to a cycle
(depth, principal boundary, exit costs) comes from ``Phi`` and ``H`` alone.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from raretrans.landscape import Landscape
from raretrans.model import INF, Rate


class NotACycleError(ValueError):
    pass


@dataclass(frozen=True)
class Cycle:
    members: frozenset[str]
    bottom_energy: Fraction
    depth: Rate
    exit_level: Rate
    principal_boundary: frozenset[str]
    exit_costs: dict[str, Rate] = field(compare=False, hash=False)
    indices: frozenset[int] = field(compare=False, hash=False, repr=False)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, state) -> bool:
        return state in self.members


def _classes(land: Landscape, domain: Iterable[int], below: Rate, strict: bool) -> list[frozenset[int]]:
    """Classes of ``Phi(x, y) <= below`` (or ``<``) among ``domain``, union-find."""
    domain = sorted(domain)
    parent = {i: i for i in domain}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for k, i in enumerate(domain):
        for j in domain[k + 1:]:
            p = land.phi[i][j]
            if p < below or (not strict and p == below):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, set[int]] = {}
    for i in domain:
        groups.setdefault(find(i), set()).add(i)
    return [frozenset(g) for _, g in sorted(groups.items())]


def _step_levels(land: Landscape, members: frozenset[int]) -> dict[int, Rate]:
    """``min_{x in C} [H(x) + delta(x, y)]`` for each exterior y."""
    out: dict[int, Rate] = {}
    for y in range(land.n):
        if y in members:
            continue
        out[y] = min(land.h[x] + land.model.delta[x][y] for x in members)
    return out


def _is_cycle_idx(land: Landscape, members: frozenset[int]) -> bool:
    if len(members) == 1 or len(members) == land.n:
        return True
    return land.internal_level(members) < land.exit_level(members)


def _record(land: Landscape, members: frozenset[int]) -> Cycle:
    labels = land.model.labels(members)
    low = min(land.h[i] for i in members)
    if len(members) == land.n:
        return Cycle(labels, low, INF, INF, frozenset(), {}, members)
    level = land.exit_level(members)
    steps = _step_levels(land, members)
    costs = {land.states[y]: (s - level if s != INF else INF) for y, s in steps.items()}
    boundary = frozenset(land.states[y] for y, s in steps.items() if s == level)
    if not boundary:
        raise AssertionError(f"empty principal boundary for {sorted(labels)}")
    return Cycle(labels, low, level - low, level, boundary, costs, members)


def _checked(land: Landscape, c) -> frozenset[int]:
    members = c.indices if isinstance(c, Cycle) else land.model.indices(c)
    if not members:
        raise ValueError("set must be nonempty")
    if not _is_cycle_idx(land, members):
        raise NotACycleError(f"{sorted(land.model.labels(members))} is not a cycle")
    return members


def _proper(land: Landscape, c) -> frozenset[int]:
    members = _checked(land, c)
    if len(members) == land.n:
        raise ValueError("the whole space has no exterior")
    return members


def is_cycle(land: Landscape, a) -> bool:
    members = land.model.indices(a)
    if not members:
        raise ValueError("set must be nonempty")
    return _is_cycle_idx(land, members)


def cycle(land: Landscape, c) -> Cycle:
    return _record(land, _checked(land, c))


def depth(land: Landscape, c) -> Rate:
    """Depth by ``Phi(C, X\\C) - H(C)``, confirmed by the per-state formula."""
    members = _proper(land, c)
    rest = [y for y in range(land.n) if y not in members]
    by_exit = land.exit_level(members) - min(land.h[i] for i in members)
    by_state = max(min(land.phi[x][y] for y in rest) - land.h[x] for x in members)
    if by_exit != by_state:
        raise AssertionError(f"depth formulas disagree: {by_exit} vs {by_state}")
    return by_exit


def principal_boundary(land: Landscape, c) -> frozenset[str]:
    return _record(land, _proper(land, c)).principal_boundary


def exit_costs(land: Landscape, c) -> dict[str, Rate]:
    return _record(land, _proper(land, c)).exit_costs


class CycleTree:
    """All cycles of a landscape, ordered by size, with inclusion links."""

    def __init__(self, land: Landscape, node_sets: Iterable[frozenset[int]]):
        self.landscape = land
        ordered = sorted(set(node_sets), key=lambda s: (len(s), sorted(s)))
        self.nodes: list[Cycle] = [_record(land, s) for s in ordered]
        self._by_members = {c.indices: c for c in self.nodes}
        self.parent: dict[frozenset[str], frozenset[str] | None] = {}
        for k, c in enumerate(self.nodes):
            up = next((d for d in self.nodes[k + 1:] if c.indices < d.indices), None)
            self.parent[c.members] = up.members if up is not None else None

    @property
    def root(self) -> Cycle:
        return self.nodes[-1]

    def children(self, c: Cycle) -> list[Cycle]:
        return [d for d in self.nodes if self.parent[d.members] == c.members]

    def member_sets(self) -> set[frozenset[str]]:
        return {c.members for c in self.nodes}

    def smallest_containing(self, indices: Iterable[int]) -> Cycle:
        want = frozenset(indices)
        return next(c for c in self.nodes if want <= c.indices)

    def get(self, members) -> Cycle | None:
        return self._by_members.get(self.landscape.model.indices(members))


def cycle_tree(land: Landscape) -> CycleTree:
    n = land.n
    nodes = {frozenset({i}) for i in range(n)}
    nodes.add(frozenset(range(n)))
    for v in land.levels:
        nodes.update(_classes(land, range(n), v, strict=False))
    return CycleTree(land, nodes)


def max_strict_subcycles(land: Landscape, c) -> list[Cycle]:
    """Children of a non-singleton cycle: classes below its top internal height."""
    members = _checked(land, c)
    if len(members) < 2:
        raise ValueError("a singleton has no strict subcycles")
    top = land.internal_level(members)
    parts = _classes(land, members, top, strict=True)
    return [_record(land, p) for p in parts]


def maximal_partition(land: Landscape, d) -> list[Cycle]:
    """Partition of D into the sets ``{x} + {y : Phi(x, y) < Phi(x, X\\D)}``."""
    dom = land.model.indices(d)
    if not dom:
        raise ValueError("domain must be nonempty")
    rest = [z for z in range(land.n) if z not in dom]
    parts: list[frozenset[int]] = []
    for x in sorted(dom):
        if any(x in p for p in parts):
            continue
        escape = min((land.phi[x][z] for z in rest), default=INF)
        part = frozenset({x} | {y for y in range(land.n) if land.phi[x][y] < escape})
        if not part <= dom or not _is_cycle_idx(land, part):
            raise AssertionError(f"partition element {sorted(part)} is malformed")
        parts.append(part)
    covered = [i for p in parts for i in p]
    if len(covered) != len(set(covered)):
        raise AssertionError("partition elements overlap")
    return [_record(land, p) for p in parts]


OUT = -1


@dataclass(frozen=True)
class VtjGraph:
    """Partition cycles with edges ``C -> C'`` when ``B(C)`` meets ``C'``.

    ``edges[i]`` lists successor node positions; ``OUT`` (-1) marks a
    principal boundary point outside the domain.
    """

    nodes: tuple[Cycle, ...]
    edges: dict[int, tuple[int, ...]]

    def labelled_edges(self) -> list[tuple[frozenset[str], frozenset[str] | str]]:
        out = []
        for i, succ in self.edges.items():
            for j in succ:
                out.append((self.nodes[i].members, "OUT" if j == OUT else self.nodes[j].members))
        return out


def vtj_graph(land: Landscape, partition: Sequence, d) -> VtjGraph:
    dom = land.model.indices(d)
    cycles = [p if isinstance(p, Cycle) else cycle(land, p) for p in partition]
    cycles.sort(key=lambda c: min(c.indices))
    seen: set[int] = set()
    for c in cycles:
        if seen & c.indices:
            raise ValueError("partition elements overlap")
        seen |= c.indices
    if seen != dom:
        raise ValueError("partition does not cover the domain")
    edges: dict[int, tuple[int, ...]] = {}
    for i, c in enumerate(cycles):
        bnd = land.model.indices(c.principal_boundary)
        succ = [j for j, other in enumerate(cycles) if j != i and bnd & other.indices]
        if bnd - dom:
            succ.append(OUT)
        edges[i] = tuple(succ)
    return VtjGraph(tuple(cycles), edges)


def vtj_exit_path(land: Landscape, d, x) -> list[Cycle]:
    """First breadth-first chain of partition cycles from x's cycle out of D."""
    dom = land.model.indices(d)
    xi = land.model.index(x)
    if xi not in dom:
        raise ValueError("start must lie in the domain")
    if len(dom) == land.n:
        raise ValueError("the whole space has no exterior")
    graph = vtj_graph(land, maximal_partition(land, d), d)
    start = next(i for i, c in enumerate(graph.nodes) if xi in c.indices)
    prev: dict[int, int | None] = {start: None}
    queue = deque([start])
    while queue:
        i = queue.popleft()
        if OUT in graph.edges[i]:
            chain = [i]
            while prev[chain[-1]] is not None:
                chain.append(prev[chain[-1]])
            return [graph.nodes[k] for k in reversed(chain)]
        for j in graph.edges[i]:
            if j not in prev:
                prev[j] = i
                queue.append(j)
    raise AssertionError("no vtj-connected exit path")


def check_isolated_union(land: Landscape, cycles: Iterable) -> bool:
    """Whether a vtj-connected system keeps all principal boundaries inside.

    A system is vtj-connected when, for each pair, one element reaches the
    other along vtj edges. When isolated, the union must itself be a cycle.
    """
    items = [c if isinstance(c, Cycle) else cycle(land, c) for c in cycles]
    union: frozenset[int] = frozenset()
    for c in items:
        if union & c.indices:
            raise ValueError("cycles are not disjoint")
        union |= c.indices
    graph = vtj_graph(land, items, land.model.labels(union))
    reach = []
    for i in range(len(graph.nodes)):
        seen = {i}
        queue = deque([i])
        while queue:
            u = queue.popleft()
            for v in graph.edges[u]:
                if v != OUT and v not in seen:
                    seen.add(v)
                    queue.append(v)
        reach.append(seen)
    for i in range(len(reach)):
        for j in range(i + 1, len(reach)):
            if j not in reach[i] and i not in reach[j]:
                raise ValueError("cycles do not form a vtj-connected system")
    isolated = all(OUT not in succ for succ in graph.edges.values())
    if isolated and not _is_cycle_idx(land, union):
        raise AssertionError("isolated vtj system whose union is not a cycle")
    return isolated
