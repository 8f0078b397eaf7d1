"""Rare-transition models: state space, rate function, parsing and validation.

Rates are exact: finite values are :class:`fractions.Fraction`, forbidden
transitions are ``math.inf``. Mixed arithmetic behaves as needed
(``Fraction(2) + inf == inf``, ``Fraction(2) < inf``), so the rest of the
package can sum and compare rates without special cases. Never subtract two
rates unless both are known to be finite.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

INF = math.inf

Rate = Union[Fraction, float]

_INF_TOKENS = {"inf", "infinity", "+inf", "+infinity", "∞"}


class ModelError(ValueError):
    """Raised for malformed or inconsistent model input."""


def parse_rate(text) -> Rate:
    """Parse a rate literal into an exact Fraction or ``INF``.

    Accepts decimal strings ("0.5"), ratios ("1/3"), integers and the
    infinity tokens "inf"/"Infinity". Floats are refused because they are
    not exact.
    """
    if isinstance(text, bool):
        raise ModelError(f"malformed number: {text!r}")
    if isinstance(text, Fraction):
        value = text
    elif isinstance(text, int):
        value = Fraction(text)
    elif isinstance(text, float):
        if math.isinf(text) and text > 0:
            return INF
        raise ModelError(f"rates must be given as strings, got float {text!r}")
    elif isinstance(text, str):
        token = text.strip()
        if token.lower() in _INF_TOKENS:
            return INF
        try:
            value = Fraction(token)
        except (ValueError, ZeroDivisionError):
            raise ModelError(f"malformed number: {text!r}") from None
    else:
        raise ModelError(f"malformed number: {text!r}")
    return value


def parse_number(text) -> Fraction:
    value = parse_rate(text)
    if value == INF:
        raise ModelError(f"expected a finite number, got {text!r}")
    return value


def fmt_rate(value) -> str:
    """Exact string form: decimal when terminating, ``p/q`` otherwise."""
    if value == INF:
        return "Infinity"
    value = Fraction(value)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    if value.denominator == 1:
        return str(value.numerator)
    digits = max(twos, fives)
    scaled = value * 10**digits
    sign = "-" if scaled < 0 else ""
    whole = abs(scaled.numerator)
    text = str(whole).rjust(digits + 1, "0")
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


@dataclass(frozen=True)
class Model:
    """A finite state space with a rate function ``delta``.

    ``delta[i][j]`` is the cost of the one-step transition i -> j. The
    diagonal is always ``INF``; laziness belongs to the simulator.
    """

    states: tuple[str, ...]
    delta: tuple[tuple[Rate, ...], ...]
    potential: tuple[Fraction, ...] | None = None
    support: tuple[tuple[bool, ...], ...] | None = None
    mode: str = "explicit"
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise ModelError("a model needs at least one state")
        for label in states:
            if not isinstance(label, str) or not label:
                raise ModelError(f"state labels must be non-empty strings, got {label!r}")
        if len(set(states)) != len(states):
            dupes = sorted({s for s in states if states.count(s) > 1})
            raise ModelError(f"duplicate label(s): {', '.join(dupes)}")
        n = len(states)
        if len(self.delta) != n or any(len(row) != n for row in self.delta):
            raise ModelError("delta must be an n x n matrix")
        rows = []
        for i, row in enumerate(self.delta):
            new_row = []
            for j, value in enumerate(row):
                if i == j:
                    new_row.append(INF)
                    continue
                value = parse_rate(value)
                if value < 0:
                    raise ModelError(
                        f"negative rate {fmt_rate(value)} for {states[i]}->{states[j]}"
                    )
                new_row.append(value)
            rows.append(tuple(new_row))
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "delta", tuple(rows))
        if self.potential is not None:
            if len(self.potential) != n:
                raise ModelError("potential must have one value per state")
            object.__setattr__(
                self, "potential", tuple(parse_number(u) for u in self.potential)
            )
        if self.support is not None:
            object.__setattr__(
                self, "support", tuple(tuple(bool(b) for b in row) for row in self.support)
            )
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(states)})

    @property
    def n(self) -> int:
        return len(self.states)

    def index(self, state) -> int:
        """Index of a state given by label (or already an index)."""
        if isinstance(state, str):
            try:
                return self._index[state]
            except KeyError:
                raise ModelError(f"unknown state {state!r}") from None
        if isinstance(state, int) and 0 <= state < self.n:
            return state
        raise ModelError(f"unknown state {state!r}")

    def indices(self, states: Iterable) -> frozenset[int]:
        if isinstance(states, str):
            states = [states]
        return frozenset(self.index(s) for s in states)

    def labels(self, indices: Iterable[int]) -> frozenset[str]:
        return frozenset(self.states[i] for i in indices)

    def rate(self, x, y) -> Rate:
        return self.delta[self.index(x)][self.index(y)]

    def successors(self, i: int) -> list[int]:
        return [j for j, r in enumerate(self.delta[i]) if r != INF]


@dataclass(frozen=True)
class ValidationReport:
    irreducible: bool
    unreachable_pairs: list[tuple[str, str]]
    warnings: list[str]


def _reachable_from(model: Model, i: int) -> set[int]:
    seen = {i}
    queue = deque([i])
    while queue:
        u = queue.popleft()
        for v in model.successors(u):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def check_irreducible(model: Model) -> ValidationReport:
    unreachable = []
    for i in range(model.n):
        reach = _reachable_from(model, i)
        unreachable.extend(
            (model.states[i], model.states[j]) for j in range(model.n) if j not in reach
        )
    warnings = []
    for i in range(model.n):
        for j in range(model.n):
            if i != j and model.delta[i][j] != INF and model.delta[j][i] == INF:
                warnings.append(
                    f"one-way transition {model.states[i]}->{model.states[j]} "
                    f"(reverse rate is Infinity)"
                )
    return ValidationReport(not unreachable, unreachable, warnings)


def _support_matrix(states: Sequence[str], support) -> list[list[bool]]:
    n = len(states)
    support = list(support)
    pairs = all(
        isinstance(item, (tuple, list)) and len(item) == 2
        and all(isinstance(s, str) for s in item)
        for item in support
    )
    if not support:
        return [[False] * n for _ in range(n)]
    if pairs:
        index = {s: i for i, s in enumerate(states)}
        q = [[False] * n for _ in range(n)]
        for a, b in support:
            if a not in index or b not in index:
                raise ModelError(f"unknown state in support pair ({a!r}, {b!r})")
            q[index[a]][index[b]] = True
        return q
    if len(support) != n or any(len(row) != n for row in support):
        raise ModelError("support must be label pairs or an n x n boolean matrix")
    return [[bool(b) for b in row] for row in support]


def build_metropolis(states: Sequence[str], potential, support) -> Model:
    """Metropolis rates ``(U(y) - U(x))^+`` on the support, ``INF`` elsewhere.

    ``potential`` is a mapping label -> value or a sequence aligned with
    ``states``; ``support`` is a collection of (from, to) label pairs or an
    n x n boolean matrix.
    """
    states = tuple(states)
    if isinstance(potential, Mapping):
        missing = [s for s in states if s not in potential]
        if missing:
            raise ModelError(f"potential missing for state(s): {', '.join(missing)}")
        u = [parse_number(potential[s]) for s in states]
    else:
        u = [parse_number(v) for v in potential]
    if len(u) != len(states):
        raise ModelError("potential must have one value per state")
    q = _support_matrix(states, support)
    n = len(states)
    delta = [
        [max(u[j] - u[i], Fraction(0)) if q[i][j] and i != j else INF for j in range(n)]
        for i in range(n)
    ]
    model = Model(states, delta, potential=tuple(u), support=q, mode="metropolis")
    report = check_irreducible(model)
    if not report.irreducible:
        a, b = report.unreachable_pairs[0]
        raise ModelError(f"support is not irreducible: no path {a}->{b}")
    return model


def check_weak_reversibility(model: Model, potential) -> bool:
    """True iff ``U(x) + delta(x, y) == U(y) + delta(y, x)`` for every pair."""
    if isinstance(potential, Mapping):
        u = [parse_number(potential[s]) for s in model.states]
    else:
        u = [parse_number(v) for v in potential]
    n = model.n
    for i in range(n):
        for j in range(i + 1, n):
            if u[i] + model.delta[i][j] != u[j] + model.delta[j][i]:
                return False
    return True


def parse_model(text: str) -> Model:
    """Build a model from the JSON model-file format."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ModelError("model file must hold a JSON object")
    states = doc.get("states")
    if not isinstance(states, list) or not states:
        raise ModelError("'states' must be a non-empty list of labels")
    if len(set(map(str, states))) != len(states):
        raise ModelError("duplicate label in 'states'")
    mode = doc.get("mode", "explicit")
    index = {s: i for i, s in enumerate(states)}

    potential = None
    if doc.get("potential") is not None:
        pot = doc["potential"]
        if not isinstance(pot, dict):
            raise ModelError("'potential' must map labels to numbers")
        unknown = [s for s in pot if s not in index]
        if unknown:
            raise ModelError(f"unknown state in potential: {unknown[0]!r}")
        missing = [s for s in states if s not in pot]
        if missing:
            raise ModelError(f"potential missing for state(s): {', '.join(missing)}")
        potential = [parse_number(pot[s]) for s in states]

    if mode == "metropolis":
        if doc.get("rates"):
            raise ModelError("explicit rates are not allowed in metropolis mode")
        if potential is None or doc.get("support") is None:
            raise ModelError("metropolis mode requires 'potential' and 'support'")
        return build_metropolis(states, potential, [tuple(p) for p in doc["support"]])
    if mode != "explicit":
        raise ModelError(f"unknown mode {mode!r}")

    n = len(states)
    delta: list[list[Rate]] = [[INF] * n for _ in range(n)]
    seen = set()
    for entry in doc.get("rates", []):
        try:
            a, b, value = entry["from"], entry["to"], entry["delta"]
        except (KeyError, TypeError):
            raise ModelError(f"rate entries need 'from', 'to', 'delta': {entry!r}") from None
        if a not in index or b not in index:
            raise ModelError(f"unknown state in rate {a!r}->{b!r}")
        if (a, b) in seen:
            raise ModelError(f"rate {a}->{b} given twice")
        seen.add((a, b))
        rate = parse_rate(value)
        if rate < 0:
            raise ModelError(f"negative rate {value!r} for {a}->{b}")
        if a != b:
            delta[index[a]][index[b]] = rate
    support = None
    if doc.get("support") is not None:
        support = _support_matrix(states, [tuple(p) for p in doc["support"]])
    return Model(tuple(states), delta, potential=potential, support=support)


def load_model(path) -> Model:
    return parse_model(Path(path).read_text(encoding="utf-8"))


def model_document(model: Model) -> dict:
    """Canonical JSON-ready form of a model (inverse of :func:`parse_model`)."""
    doc: dict = {"states": list(model.states), "mode": model.mode}
    if model.potential is not None:
        doc["potential"] = {s: fmt_rate(u) for s, u in zip(model.states, model.potential)}
    if model.support is not None:
        doc["support"] = [
            [model.states[i], model.states[j]]
            for i in range(model.n)
            for j in range(model.n)
            if model.support[i][j]
        ]
    if model.mode != "metropolis":
        doc["rates"] = [
            {"from": model.states[i], "to": model.states[j], "delta": fmt_rate(r)}
            for i, row in enumerate(model.delta)
            for j, r in enumerate(row)
            if i != j and r != INF
        ]
    return doc


def dump_model(model: Model) -> str:
    return json.dumps(model_document(model), indent=2, sort_keys=True)


def explicit_model(states: Sequence[str], rates: Mapping[tuple[str, str], object]) -> Model:
    """Convenience constructor from a ``{(from, to): rate}`` mapping."""
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    delta: list[list[Rate]] = [[INF] * n for _ in range(n)]
    for (a, b), value in rates.items():
        if a not in index or b not in index:
            raise ModelError(f"unknown state in rate {a!r}->{b!r}")
        delta[index[a]][index[b]] = parse_rate(value)
    return Model(tuple(states), delta)
