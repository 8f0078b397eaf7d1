"""Path elevations and communication heights.

Heights use the edge weight ``H(u) + delta(u, v)`` composed with ``max``
along a path; the communication height is the minimax over paths, found by
a label-setting search. ``Phi(x, x)`` is taken to be ``H(x)``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from raretrans.energy import EnergyTable, virtual_energy
from raretrans.model import INF, Model, Rate


@dataclass(frozen=True)
class PathRecord:
    states: tuple[str, ...]
    elevation: Rate


def _minimax_from(model: Model, h: Sequence[Fraction], source: int):
    n = model.n
    best: list[Rate] = [INF] * n
    pred: list[int | None] = [None] * n
    best[source] = h[source]
    done = [False] * n
    heap = [(h[source], source)]
    while heap:
        level, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v in model.successors(u):
            cand = max(level, h[u] + model.delta[u][v])
            if cand < best[v]:
                best[v] = cand
                pred[v] = u
                heapq.heappush(heap, (cand, v))
    return best, pred


class Landscape:
    """Virtual energy and the full height matrix of a model, computed once."""

    def __init__(self, model: Model, energy: EnergyTable | None = None):
        self.model = model
        self.energy = energy if energy is not None else virtual_energy(model)
        self.h: tuple[Fraction, ...] = self.energy.h
        rows = [_minimax_from(model, self.h, s) for s in range(model.n)]
        self.phi: list[list[Rate]] = [r[0] for r in rows]
        self._pred = [r[1] for r in rows]

    @property
    def n(self) -> int:
        return self.model.n

    @property
    def states(self) -> tuple[str, ...]:
        return self.model.states

    def phi_sets(self, a: Iterable[int], b: Iterable[int]) -> Rate:
        b = list(b)
        return min((self.phi[i][j] for i in a for j in b), default=INF)

    def exit_level(self, members: frozenset[int]) -> Rate:
        """``Phi(A, X\\A)``; infinite when A is everything."""
        rest = [j for j in range(self.n) if j not in members]
        return self.phi_sets(members, rest)

    def internal_level(self, members: frozenset[int]) -> Rate:
        return max(self.phi[i][j] for i in members for j in members)

    def witness(self, x: int, y: int) -> list[int]:
        """A simple path from x to y realizing ``Phi(x, y)``."""
        if self.phi[x][y] == INF:
            raise ValueError("no finite path")
        path = [y]
        while path[-1] != x:
            path.append(self._pred[x][path[-1]])
        return path[::-1]

    @cached_property
    def levels(self) -> list[Rate]:
        """Sorted distinct finite step elevations ``H(x) + delta(x, y)``."""
        values = {
            self.h[i] + self.model.delta[i][j]
            for i in range(self.n)
            for j in self.model.successors(i)
        }
        return sorted(values)


def _landscape(model: Model, energy: EnergyTable | None) -> Landscape:
    return Landscape(model, energy)


def path_elevation(model: Model, energy: EnergyTable, states: Sequence) -> Rate:
    if not states:
        raise ValueError("path must be nonempty")
    idx = [model.index(s) for s in states]
    h = energy.h
    if len(idx) == 1:
        return h[idx[0]]
    return max(h[u] + model.delta[u][v] for u, v in zip(idx, idx[1:]))


def comm_height(model: Model, energy: EnergyTable, x, y) -> Rate:
    xi, yi = model.index(x), model.index(y)
    best, _ = _minimax_from(model, energy.h, xi)
    return best[yi]


def height_matrix(model: Model, energy: EnergyTable | None = None) -> list[list[Rate]]:
    return _landscape(model, energy).phi


def comm_height_sets(model: Model, energy: EnergyTable, a, b) -> Rate:
    ai, bi = model.indices(a), model.indices(b)
    if not ai or not bi:
        raise ValueError("sets must be nonempty")
    land = _landscape(model, energy)
    return land.phi_sets(ai, bi)


def bottom(energy: EnergyTable, a) -> tuple[frozenset[str], Fraction]:
    labels = [a] if isinstance(a, str) else list(a)
    if not labels:
        raise ValueError("set must be nonempty")
    values = {s: energy[s] for s in labels}
    low = min(values.values())
    return frozenset(s for s, v in values.items() if v == low), low


def external_boundary(model: Model, a) -> frozenset[str]:
    ai = model.indices(a)
    return model.labels({j for i in ai for j in model.successors(i) if j not in ai})
