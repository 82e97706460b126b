"""Static infection trials: closed forms, path moments, exact pair-sum oracle."""

import itertools
import math

import numpy as np
import pytest

from opcontact.environment import ModelParams
from opcontact.errors import BudgetExceededError
from opcontact.sir import (
    InfectionTrialField,
    count_infection_paths,
    expected_path_count,
    infect_marginal,
    infect_pair,
    pair_sum_second_moment,
    sample_infection_frequencies,
    second_moment_bound,
    theoretical_pair_correlation,
)


def test_marginal_closed_form_values():
    assert infect_marginal(ModelParams(2, 0.5, 1.0)) == pytest.approx(0.25)
    assert infect_pair(ModelParams(2, 0.5, 1.0)) == pytest.approx(1.0 / 12.0)
    # lam -> infinity: marginal -> p (the attempt always beats the removal)
    assert infect_marginal(ModelParams(2, 0.3, 1e9)) == pytest.approx(0.3, rel=1e-6)


def test_marginal_monte_carlo():
    params = ModelParams(2, 0.3, 2.0)
    marginal, joint = sample_infection_frequencies(params, 200_000, seed=3)
    m, j = infect_marginal(params), infect_pair(params)
    assert abs(marginal - m) < 3 * math.sqrt(m * (1 - m) / 200_000)
    assert abs(joint - j) < 3 * math.sqrt(j * (1 - j) / 200_000)


def test_pair_dominated_by_marginal():
    # two successes are rarer than one: q2 < q1 always
    for lam, p in [(0.5, 0.4), (1.0, 0.5), (3.0, 0.8)]:
        params = ModelParams(2, p, lam)
        assert infect_pair(params) < infect_marginal(params)


def test_forced_field_path_counts():
    params = ModelParams(2, 0.5, 1.0)
    always = InfectionTrialField(params, trial_seed=1, force_infect=True)
    never = InfectionTrialField(params, trial_seed=1, force_infect=False)
    assert count_infection_paths(always, 3) == 8
    assert count_infection_paths(never, 1) == 0
    assert count_infection_paths(always, 0) == 1


def test_path_count_budget():
    field = InfectionTrialField(ModelParams(10, 0.5, 1.0), trial_seed=0)
    with pytest.raises(BudgetExceededError):
        count_infection_paths(field, 10)


def test_field_memoization_consistent():
    field = InfectionTrialField(ModelParams(2, 0.5, 1.0), trial_seed=7)
    assert field.recovery_time((1, 2)) == field.recovery_time((1, 2))
    assert field.attempt_time((1, 2), 1) == field.attempt_time((1, 2), 1)
    assert field.attempt_time((1, 2), 1) != field.attempt_time((1, 2), 2)


def test_expected_path_count_formula():
    params = ModelParams(2, 0.5, 1.0)  # d * q1 = 0.5
    assert expected_path_count(params, 4) == pytest.approx(0.5 ** 4)


def test_pair_correlation_special_cases():
    params = ModelParams(2, 0.5, 1.0)
    q1, q2 = infect_marginal(params), infect_pair(params)
    # identical paths: each shared step contributes one marginal factor
    assert theoretical_pair_correlation(params, (1, 1), (1, 1)) == pytest.approx(q1 ** 2)
    # immediate split, disjoint afterwards: one pair factor at the origin
    assert theoretical_pair_correlation(params, (1, 1), (2, 2)) == pytest.approx(
        q2 * q1 ** 2
    )
    with pytest.raises(ValueError):
        theoretical_pair_correlation(params, (1,), (1, 2))


def _block_pmf(q1, q2):
    """pmf of (trial 1 infects, trial 2 infects) for one vertex's two out-edges."""
    return {
        (1, 1): q2,
        (1, 0): q1 - q2,
        (0, 1): q1 - q2,
        (0, 0): 1.0 - 2.0 * q1 + q2,
    }


def exact_second_moment_d2_n2(params):
    """E|M_2|^2 for d=2 by brute-force enumeration over the 3 vertex blocks.

    |M_2| = I1*(J1+J2) + I2*(K1+K2) with (I), (J), (K) the independent
    infection-outcome pairs at the origin, (1,0) and (0,1).
    """
    pmf = _block_pmf(infect_marginal(params), infect_pair(params))
    total = 0.0
    for i, pi in pmf.items():
        for j, pj in pmf.items():
            for k, pk in pmf.items():
                m = i[0] * (j[0] + j[1]) + i[1] * (k[0] + k[1])
                total += pi * pj * pk * m * m
    return total


def test_pair_sum_identity_matches_enumeration_oracle():
    for lam, p in [(1.0, 0.5), (2.0, 0.3), (0.7, 0.8)]:
        params = ModelParams(2, p, lam)
        assert pair_sum_second_moment(params, 2) == pytest.approx(
            exact_second_moment_d2_n2(params), abs=1e-12
        )


def test_second_moment_monte_carlo_agrees():
    params = ModelParams(2, 0.5, 1.0)
    res = second_moment_bound(params, 2, 4000, master_seed=11)
    assert abs(res.e_m - expected_path_count(params, 2)) < 3 * res.e_m_se
    assert abs(res.e_m2 - exact_second_moment_d2_n2(params)) < 3 * res.e_m2_se
    # direct survival dominates the Cauchy-Schwarz bound
    assert res.direct >= res.bound - 3 * math.hypot(res.direct_se, res.e_m_se)


def test_pair_sum_budget_guard():
    with pytest.raises(BudgetExceededError):
        pair_sum_second_moment(ModelParams(10, 0.5, 1.0), 5)
