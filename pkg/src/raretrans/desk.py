"""Small reference models with hand-checkable landscapes."""

from __future__ import annotations

from fractions import Fraction

from raretrans.model import INF, Model, build_metropolis, explicit_model


def _line(labels):
    return [(a, b) for a, b in zip(labels, labels[1:])] + [
        (b, a) for a, b in zip(labels, labels[1:])
    ]


def _both(pairs):
    return [(a, b) for a, b in pairs] + [(b, a) for a, b in pairs]


def well() -> Model:
    """Five states on a line, energies 0 4 1 3 2: a deep well at c."""
    states = ["a", "b", "c", "d", "e"]
    return build_metropolis(states, dict(zip(states, [0, 4, 1, 3, 2])), _line(states))


def well_with_spur() -> Model:
    """The well plus a high state f hanging off d."""
    states = ["a", "b", "c", "d", "e", "f"]
    potential = dict(zip(states, [0, 4, 1, 3, 2, 8]))
    return build_metropolis(states, potential, _line(states[:5]) + _both([("d", "f")]))


def rotor() -> Model:
    """Three-state irreversible loop a -> b -> c -> a."""
    return explicit_model(
        ["a", "b", "c"],
        {("a", "b"): Fraction(1), ("b", "c"): Fraction(0), ("c", "a"): Fraction(0)},
    )


def parallel_saddles() -> Model:
    """Eight states: x and y joined by five optimal routes over six saddles.

    Minimal gates for (x, y) are {w1, w2, w4, w6} and {w1, w2, w5, w6}.
    """
    states = ["x", "y", "w1", "w2", "w3", "w4", "w5", "w6"]
    potential = dict(zip(states, [1, 0, 5, 5, 5, 5, 5, 5]))
    pairs = [
        ("x", "w1"), ("w1", "y"),
        ("x", "w2"), ("w2", "y"), ("w2", "w3"), ("w3", "y"),
        ("x", "w4"), ("w4", "w5"), ("w5", "y"),
        ("x", "w6"), ("w6", "y"),
    ]
    return build_metropolis(states, potential, _both(pairs))


def two_routes() -> Model:
    """Seven states: two crossing routes from x to y plus a higher bypass h.

    Minimal gates for (x, y) are {s1, s2}, {s1, r1}, {r2, s2} and {r2, r1};
    reaching y through h avoids any of them at extra cost 1/2.
    """
    states = ["x", "s1", "s2", "r1", "r2", "h", "y"]
    potential = dict(zip(states, [2, 5, 5, 1, 1, Fraction(11, 2), 0]))
    pairs = [
        ("x", "s1"), ("s1", "r2"), ("r2", "y"),
        ("x", "s2"), ("s2", "r1"), ("r1", "y"),
        ("x", "h"), ("h", "y"),
    ]
    return build_metropolis(states, potential, _both(pairs))


DESK_MODELS = {
    "well": well,
    "well-spur": well_with_spur,
    "rotor": rotor,
    "parallel-saddles": parallel_saddles,
    "two-routes": two_routes,
}

__all__ = ["DESK_MODELS", "INF", "parallel_saddles", "rotor", "two_routes", "well", "well_with_spur"]
