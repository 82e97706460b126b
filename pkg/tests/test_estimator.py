"""Critical-rate estimation machinery at reduced (fast) experiment scale."""

import pytest

from opcontact.contact import SimOptions
from opcontact.environment import ModelParams, QuenchedEnvironment
from opcontact.errors import BracketError
from opcontact.estimator import (
    CriticalEstimate,
    bisect_lambda_c,
    default_bracket,
    quenched_annealed_compare,
    scaling_table,
    sweep,
)

FAST = SimOptions(box_radius=12, horizon=10.0)


def test_default_bracket_straddles_mean_field_point():
    lo, hi = default_bracket(3, 0.5)
    assert lo < 1.0 / 1.5 < hi


def test_critical_estimate_invariant():
    with pytest.raises(ValueError):
        CriticalEstimate(
            d=2, p=0.5, lambda_hat=9.0, ci=(1.0, 2.0), mode="annealed",
            env_seed=None, horizon=10.0, box_radius=10, replicas=10, eps=0.02,
        )


def test_sweep_monotone_with_common_random_numbers():
    record = sweep(2, 0.5, [0.6, 1.2, 2.4, 4.8], FAST, 800, master_seed=3)
    means = [e.mean for e in record.estimates]
    assert means == sorted(means)
    assert record.warnings == []


def test_sweep_rejects_unsorted_grid():
    with pytest.raises(ValueError):
        sweep(2, 0.5, [1.0, 0.5], FAST, 10)


def test_bisect_produces_consistent_bracket():
    est = bisect_lambda_c(
        2, 0.5, (0.5, 5.0), eps=0.05, tol=0.3, opts=FAST, replicas=800,
        master_seed=1,
    )
    assert est.ci[0] <= est.lambda_hat <= est.ci[1]
    assert est.ci[1] - est.ci[0] <= 0.3
    assert est.mode == "annealed"
    # the estimate respects the rigorous floor 1/(dp) up to the bracket width
    assert est.lambda_hat >= 1.0 - (est.ci[1] - est.ci[0])
    # endpoint history records (lam, survival, se) triples
    assert all(len(h) == 3 for h in est.endpoint_survivals)


def test_bisect_bracket_error_reports_survivals():
    with pytest.raises(BracketError) as err:
        bisect_lambda_c(
            2, 0.5, (0.05, 0.1), eps=0.05, tol=0.01, opts=FAST, replicas=300,
        )
    assert err.value.survival_lo is not None
    assert err.value.survival_hi is not None
    assert err.value.survival_hi < 0.05


def test_bisect_invalid_bracket():
    with pytest.raises(ValueError):
        bisect_lambda_c(2, 0.5, (2.0, 1.0), eps=0.05, tol=0.1, opts=FAST, replicas=10)


def test_quenched_mode_uses_translated_origins():
    env = QuenchedEnvironment(params=ModelParams(d=2, p=0.5), env_seed=44)
    est = bisect_lambda_c(
        2, 0.5, (0.5, 5.0), eps=0.05, tol=0.5, opts=FAST, replicas=400,
        mode="quenched", quenched_env=env, n_origins=2,
    )
    assert est.env_seed == 44
    assert est.mode == "quenched"


def test_compare_requires_enough_seeds():
    with pytest.raises(ValueError):
        quenched_annealed_compare(2, 0.5, [1, 2], FAST, 10)


def test_scaling_table_rows():
    rows = scaling_table(
        0.5, [3, 2], SimOptions(box_radius=10, horizon=8.0), 400,
        eps=0.05, tol=0.3, c_hat=0.3, master_seed=5,
    )
    assert [r.d for r in rows] == [2, 3]
    for r in rows:
        assert r.lower_bound == pytest.approx(1.0 / (r.d * 0.5))
        assert r.error is None
        assert r.lambda_hat >= r.lower_bound - (r.ci[1] - r.ci[0])
    # d=2, p=0.5: the empirical upper-bound denominator is not positive
    assert rows[0].upper_bound is None
    assert rows[1].upper_bound == pytest.approx(1.0 / (1.5 - 2 * 0.5 * 0.3 / 3 - 1.0))
