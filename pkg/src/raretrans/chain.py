"""Finite-beta chain construction and exact linear-algebra baselines.

The chain at inverse temperature ``beta`` is

    p(x, y) = exp(-beta * delta(x, y)) / n        for y != x
    p(x, x) = 1 - sum_{y != x} p(x, y)            (>= 1/n)

Solves run in mpmath with enough digits to resolve every probability of the
form ``exp(-beta * r)`` that can occur, so results stay accurate when the
entries span hundreds of orders of magnitude. Diagonal terms of ``I - P`` are
always formed as sums of off-diagonal mass, never as ``1 - p(x, x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import mpmath
import numpy as np

from raretrans.model import INF, Model

RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class TransitionMatrix:
    states: tuple[str, ...]
    beta: float
    p: np.ndarray


def transition_matrix(model: Model, beta: float) -> TransitionMatrix:
    if beta <= 0:
        raise ValueError("beta must be positive")
    n = model.n
    p = np.zeros((n, n))
    for i, row in enumerate(model.delta):
        for j, r in enumerate(row):
            if i != j and r != INF:
                p[i, j] = math.exp(-beta * float(r)) / n
        p[i, i] = 1.0 - p[i].sum()
    return TransitionMatrix(model.states, float(beta), p)


def _digits(model: Model, beta: float) -> int:
    # Worst case: a product of one finite rate per state.
    total = sum(max((float(r) for r in row if r != INF), default=0.0) for row in model.delta)
    return 30 + int(math.ceil(beta * total / math.log(10)))


def _off_diagonal(model: Model, beta) -> list[list]:
    """mpmath off-diagonal transition probabilities (diagonal left at 0)."""
    n = model.n
    beta = mpmath.mpf(beta)
    return [
        [
            mpmath.exp(-beta * mpmath.mpf(r.numerator) / r.denominator) / n
            if i != j and r != INF
            else mpmath.mpf(0)
            for j, r in enumerate(row)
        ]
        for i, row in enumerate(model.delta)
    ]


def stationary_solve(model: Model, beta: float, *, as_mp: bool = False):
    """Invariant distribution of the chain, by Grassmann-Taksar-Heyman elimination.

    GTH is subtraction-free, so tiny probabilities keep full relative
    accuracy. Returns floats unless ``as_mp`` is set.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    n = model.n
    with mpmath.workdps(_digits(model, beta)):
        a = _off_diagonal(model, beta)
        for k in range(n - 1, 0, -1):
            s = mpmath.fsum(a[k][j] for j in range(k))
            if s == 0:
                raise ValueError("chain is not irreducible")
            for i in range(k):
                a[i][k] /= s
            for i in range(k):
                if a[i][k] == 0:
                    continue
                for j in range(k):
                    if i != j:
                        a[i][j] += a[i][k] * a[k][j]
        pi = [mpmath.mpf(1)]
        for k in range(1, n):
            pi.append(mpmath.fsum(pi[i] * a[i][k] for i in range(k)))
        total = mpmath.fsum(pi)
        pi = [v / total for v in pi]

        off = _off_diagonal(model, beta)
        residual = mpmath.mpf(0)
        for j in range(n):
            inflow = mpmath.fsum(pi[i] * off[i][j] for i in range(n) if i != j)
            outflow = pi[j] * mpmath.fsum(off[j])
            residual = max(residual, abs(inflow - outflow))
        if residual > RESIDUAL_TOL:
            raise ArithmeticError(f"stationary residual {mpmath.nstr(residual, 5)} too large")
        if as_mp:
            return [+v for v in pi]
        return [float(v) for v in pi]


def _absorbing_system(model: Model, beta: float, target: Iterable[int]):
    target = set(target)
    free = [i for i in range(model.n) if i not in target]
    off = _off_diagonal(model, beta)
    pos = {s: k for k, s in enumerate(free)}
    m = len(free)
    a = mpmath.matrix(m, m)
    for k, i in enumerate(free):
        a[k, k] = mpmath.fsum(off[i])
        for j in free:
            if j != i:
                a[k, pos[j]] = -off[i][j]
    return free, pos, off, a


def _check_can_leave(model: Model, target: set[int]) -> None:
    # Every free state must reach the target, else I - Q is singular.
    reach = set(target)
    changed = True
    while changed:
        changed = False
        for i in range(model.n):
            if i not in reach and any(j in reach for j in model.successors(i)):
                reach.add(i)
                changed = True
    if len(reach) != model.n:
        stuck = sorted(model.states[i] for i in range(model.n) if i not in reach)
        raise np.linalg.LinAlgError(f"singular system: {', '.join(stuck)} cannot reach the target")


def hitting_times_mp(model: Model, beta: float, target: Iterable[int]) -> dict[int, mpmath.mpf]:
    """Expected hitting times of ``target`` from every state (mpmath values)."""
    target = set(target)
    if not target:
        raise ValueError("target must be nonempty")
    _check_can_leave(model, target)
    out = {i: mpmath.mpf(0) for i in target}
    with mpmath.workdps(_digits(model, beta)):
        free, pos, off, a = _absorbing_system(model, beta, target)
        if not free:
            return out
        rhs = mpmath.matrix([1] * len(free))
        h = mpmath.lu_solve(a, rhs)
        res = mpmath.norm(a * h - rhs, mpmath.inf)
        if res > 1e-10:
            raise ArithmeticError(f"hitting-time residual {mpmath.nstr(res, 5)} too large")
        for i in free:
            out[i] = +h[pos[i]]
    return out


def expected_hitting_solve(model: Model, beta: float, start, target) -> float:
    """Exact ``E[tau_target]`` from ``start`` (solves ``(I - Q) h = 1``)."""
    target_idx = model.indices(target)
    start_idx = model.index(start)
    if start_idx in target_idx:
        return 0.0
    return float(hitting_times_mp(model, beta, target_idx)[start_idx])


def absorption_probabilities_mp(
    model: Model, beta: float, target: Iterable[int]
) -> dict[int, dict[int, mpmath.mpf]]:
    """``P_x[X at tau_target == y]`` for every free state x and target state y."""
    target = sorted(set(target))
    if not target:
        raise ValueError("target must be nonempty")
    _check_can_leave(model, set(target))
    result: dict[int, dict[int, mpmath.mpf]] = {}
    with mpmath.workdps(_digits(model, beta)):
        free, pos, off, a = _absorbing_system(model, beta, target)
        if free:
            lu_rhs = mpmath.matrix(len(free), len(target))
            for k, i in enumerate(free):
                for c, y in enumerate(target):
                    lu_rhs[k, c] = off[i][y]
            sol = _solve_columns(a, lu_rhs)
            for k, i in enumerate(free):
                result[i] = {y: max(+sol[k, c], mpmath.mpf(0)) for c, y in enumerate(target)}
        for y in target:
            result[y] = {z: mpmath.mpf(1 if z == y else 0) for z in target}
    return result


def _solve_columns(a, b):
    out = mpmath.matrix(b.rows, b.cols)
    for c in range(b.cols):
        col = mpmath.lu_solve(a, b.column(c))
        for r in range(b.rows):
            out[r, c] = col[r]
    return out


def exit_distribution_solve(model: Model, beta: float, domain, start) -> dict[str, float]:
    """Exact law of the exit state from ``domain`` started at ``start``."""
    dom = model.indices(domain)
    outside = [i for i in range(model.n) if i not in dom]
    probs = absorption_probabilities_mp(model, beta, outside)[model.index(start)]
    return {model.states[y]: float(p) for y, p in probs.items()}


def ols_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``ys`` against ``xs``."""
    if len(xs) < 2:
        raise ValueError("slope needs at least two points")
    slope, _ = np.polyfit(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), 1)
    return float(slope)
