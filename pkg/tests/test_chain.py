import math

import numpy as np
import pytest
from hypothesis import given

from generators import irreducible_models, metropolis_models
from raretrans.chain import (
    absorption_probabilities_mp,
    exit_distribution_solve,
    expected_hitting_solve,
    ols_slope,
    stationary_solve,
    transition_matrix,
)
from raretrans.model import INF, explicit_model

TWO = explicit_model(["a", "b"], {("a", "b"): 1, ("b", "a"): 0})


def test_two_state_matrix():
    p = transition_matrix(TWO, math.log(2)).p
    assert p[0, 1] == pytest.approx(0.25, abs=1e-15)
    assert p[0, 0] == pytest.approx(0.75, abs=1e-15)
    with pytest.raises(ValueError):
        transition_matrix(TWO, 0)


def test_forbidden_moves_have_zero_probability():
    m = explicit_model(["a", "b"], {("a", "b"): 0, ("b", "a"): INF})
    assert transition_matrix(m, 3).p[1, 0] == 0.0


@given(irreducible_models)
def test_rows_are_stochastic_and_lazy(model):
    for beta in (0.5, 4.0, 30.0):
        p = transition_matrix(model, beta).p
        assert np.allclose(p.sum(axis=1), 1.0, atol=1e-12, rtol=0)
        assert (np.diag(p) >= 1 / model.n - 1e-15).all()


@given(irreducible_models)
def test_stationary_distribution_is_invariant(model):
    pi = np.array(stationary_solve(model, 2.0))
    p = transition_matrix(model, 2.0).p
    assert pi.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(pi @ p, pi, atol=1e-12, rtol=0)


@given(metropolis_models)
def test_metropolis_measure_is_gibbs(model):
    # Metropolis chains are reversible for exp(-beta U).
    beta = 1.5
    pi = stationary_solve(model, beta)
    weights = [math.exp(-beta * float(u - min(model.potential))) for u in model.potential]
    total = sum(weights)
    assert pi == pytest.approx([w / total for w in weights], rel=1e-9)


def test_rotor_measure_is_exponentially_small(rotor):
    pi = stationary_solve(rotor, 10)
    ratio = pi[1] / pi[0]
    assert math.exp(-10) / 3 <= ratio <= 3 * math.exp(-10)


def test_two_state_hitting_time():
    for beta in (1.0, 5.0, 12.0):
        assert expected_hitting_solve(TWO, beta, "a", ["b"]) == pytest.approx(2 * math.exp(beta), rel=1e-12)
    assert expected_hitting_solve(TWO, 3.0, "b", ["b"]) == 0.0


def test_well_escape_slope(well):
    betas = (4, 6, 8)
    logs = [math.log(expected_hitting_solve(well, b, "c", ["a"])) for b in betas]
    assert ols_slope(betas, logs) == pytest.approx(3, abs=0.2)


def test_hitting_solve_rejects_trapped_states():
    m = explicit_model(["a", "b", "c"], {("a", "b"): 0, ("b", "a"): 0, ("c", "a"): 0})
    with pytest.raises(np.linalg.LinAlgError, match="singular"):
        expected_hitting_solve(m, 2.0, "a", ["c"])


def test_absorption_probabilities_sum_to_one(well):
    probs = absorption_probabilities_mp(well, 3.0, [0, 3])
    for row in probs.values():
        assert float(sum(row.values())) == pytest.approx(1.0, abs=1e-12)
    # b lies between a and the rest, so from c the chain must pass b before a.
    assert float(probs[2][0]) < float(probs[2][3])


def test_exit_distribution_of_singleton(well):
    law = exit_distribution_solve(well, 2.0, ["b"], "b")
    assert law["a"] == pytest.approx(0.5)
    assert law["c"] == pytest.approx(0.5)


def test_ols_slope_needs_two_points():
    assert ols_slope([1, 2, 3], [2, 4, 6]) == pytest.approx(2)
    with pytest.raises(ValueError):
        ols_slope([1], [1])
