"""Event-driven contact process: exact small-chain oracles, coupling, estimators."""

import math

import numpy as np
import pytest

from opcontact.contact import (
    Estimate,
    SimOptions,
    annealed_occupation,
    run_coupled_pair,
    run_quenched,
    survival_probability,
)
from opcontact.environment import DirectedEdge, ModelParams, QuenchedEnvironment, edge_state
from opcontact.rngtools import seed_schedule


def _env(d, p, seed, **kw):
    return QuenchedEnvironment(params=ModelParams(d=d, p=p), env_seed=seed, **kw)


def _seed_with_open_first_edge(p=0.5):
    """An environment seed whose edge (0,) -> (1,) is open (for two-site oracles)."""
    for seed in range(100):
        env = _env(1, p, seed)
        if edge_state(env, DirectedEdge((0,), 1)):
            return seed
    raise AssertionError("no suitable seed in range")


def two_site_occupation(lam: float, t: float) -> float:
    """Exact P(origin infected at t) for the 2-site chain via the matrix exponential.

    States (eta(0), eta(1)) ordered [00, 10, 01, 11]; site 0 infects site 1
    through its single open out-edge at rate lam; site 1's out-edge leaves
    the domain; recoveries at rate 1; 00 absorbing.
    """
    from scipy.linalg import expm

    Q = np.zeros((4, 4))
    Q[1, 0] = 1.0   # 10 -> 00
    Q[1, 3] = lam   # 10 -> 11
    Q[2, 0] = 1.0   # 01 -> 00
    Q[3, 2] = 1.0   # 11 -> 01
    Q[3, 1] = 1.0   # 11 -> 10
    np.fill_diagonal(Q, -Q.sum(axis=1))
    dist = expm(Q * t)[1]  # start in 10
    return dist[1] + dist[3]


def test_sim_options_validation():
    with pytest.raises(ValueError):
        SimOptions(box_radius=0)
    with pytest.raises(ValueError):
        SimOptions(horizon=0.0)
    with pytest.raises(ValueError):
        SimOptions(direction="sideways")


def test_estimate_from_indicators():
    est = Estimate.from_indicators(np.array([1.0, 0.0, 1.0, 1.0]))
    assert est.mean == 0.75
    assert est.replicas == 4
    assert est.se == pytest.approx(math.sqrt(0.75 * 0.25 / 4))


def test_run_quenched_deterministic():
    env = _env(2, 0.6, 4)
    opts = SimOptions(box_radius=8, horizon=3.0, rng_seed=99)
    a = run_quenched(env, 1.2, [(0, 0)], opts)
    b = run_quenched(env, 1.2, [(0, 0)], opts)
    assert a.final == b.final
    assert a.occupied_origin_trace == b.occupied_origin_trace
    assert a.extinction_time == b.extinction_time


def test_run_quenched_input_validation():
    env = _env(2, 0.5, 0)
    opts = SimOptions(box_radius=5, horizon=1.0)
    with pytest.raises(ValueError):
        run_quenched(env, 1.0, [], opts)
    with pytest.raises(ValueError):
        run_quenched(env, 1.0, [(9, 9)], opts)
    with pytest.raises(ValueError):
        run_quenched(env, 1.0, [(0, 0, 0)], opts)


def test_probe_trace_alternates():
    env = _env(2, 0.7, 12)
    opts = SimOptions(box_radius=10, horizon=4.0, rng_seed=3)
    res = run_quenched(env, 2.0, [(0, 0)], opts)
    trace = res.occupied_origin_trace
    assert trace[0] == (0.0, True)
    for (t0, s0), (t1, s1) in zip(trace, trace[1:]):
        assert t1 > t0
        assert s1 != s0


def test_isolated_site_extinction_is_exp1():
    # all edges closed: the single infected site just waits an Exp(1) recovery
    env = _env(2, 0.5, 0, forced=False)
    T = 1.0
    opts = SimOptions(box_radius=3, horizon=T)
    n = 20_000
    alive = 0
    times = []
    for r in range(n):
        res = run_quenched(
            env, 1.5, [(0, 0)],
            SimOptions(box_radius=3, horizon=T, rng_seed=seed_schedule(5, "iso", r)),
            record_probe=False,
        )
        alive += res.alive_at_horizon
        if res.extinction_time is not None:
            times.append(res.extinction_time)
    target = math.exp(-T)
    se = math.sqrt(target * (1 - target) / n)
    assert abs(alive / n - target) < 3 * se
    # conditional mean of Exp(1) truncated to [0, T]: (1 - (1+T)e^-T) / (1 - e^-T)
    cond_mean = (1 - (1 + T) * math.exp(-T)) / (1 - math.exp(-T))
    assert abs(np.mean(times) - cond_mean) < 3 * np.std(times) / math.sqrt(len(times))


def test_two_site_chain_matches_matrix_exponential():
    pytest.importorskip("scipy")
    from opcontact import kernels
    from opcontact.environment import p_threshold
    from opcontact.rngtools import label_state

    lam, t = 1.3, 0.7
    seed = _seed_with_open_first_edge()
    n = 100_000
    # box radius 1 around a single seeded site: infection can only reach (1,),
    # whose own out-edge leaves the box, so this is exactly the 2-site chain
    _, probe_final, _, _, _ = kernels.contact_sparse_batch(
        1, 1, lam, 0, p_threshold(0.5), seed, True, np.zeros(1, dtype=np.int64),
        label_state(17, "proc"), n, t, np.array([[0]], dtype=np.int64),
        0, 0, (0,), 0,
    )
    freq = float(np.asarray(probe_final).mean())
    exact = two_site_occupation(lam, t)
    se = math.sqrt(exact * (1 - exact) / n)
    assert abs(freq - exact) < 3 * se


def test_coupled_pair_inclusion_and_monotonicity():
    env = _env(2, 0.6, 31)
    opts = SimOptions(box_radius=10, horizon=4.0)
    lo_survives = hi_survives = 0
    for r in range(300):
        res = run_coupled_pair(
            env, 0.8, 2.0, [(0, 0)],
            SimOptions(box_radius=10, horizon=4.0, rng_seed=seed_schedule(9, "pair", r)),
        )
        assert res["inclusion_ok"]
        assert res["final_lo"] <= res["final_hi"]
        assert res["alive_hi"] or not res["alive_lo"]
        lo_survives += res["alive_lo"]
        hi_survives += res["alive_hi"]
    assert lo_survives <= hi_survives


def test_coupled_pair_rejects_misordered_rates():
    env = _env(2, 0.6, 31)
    with pytest.raises(ValueError):
        run_coupled_pair(env, 2.0, 1.0, [(0, 0)], SimOptions())


def test_survival_monotone_in_lambda():
    opts = SimOptions(box_radius=12, horizon=6.0)
    means = [
        survival_probability(
            ModelParams(d=2, p=0.5, lam=lam), opts, 3000, master_seed=2
        ).mean
        for lam in (0.5, 1.5, 4.0)
    ]
    assert means[0] < means[1] < means[2]


def test_survival_modes():
    params = ModelParams(d=2, p=0.5, lam=1.0)
    opts = SimOptions(box_radius=8, horizon=2.0)
    with pytest.raises(ValueError):
        survival_probability(params, opts, 10, mode="quenched")
    with pytest.raises(ValueError):
        survival_probability(params, opts, 10, mode="other")
    env = _env(2, 0.5, 6)
    est = survival_probability(params, opts, 500, mode="quenched", quenched_env=env)
    assert 0.0 <= est.mean <= 1.0


def test_annealed_occupation_time_zero():
    params = ModelParams(d=2, p=0.5, lam=1.0)
    est = annealed_occupation(params, 0.0, (0, 0), 100, SimOptions())
    assert est.mean == 1.0 and est.se == 0.0


def test_threaded_batch_matches_serial():
    params = ModelParams(d=2, p=0.5, lam=1.2)
    serial = survival_probability(
        params, SimOptions(box_radius=8, horizon=3.0, threads=1), 400, master_seed=8
    )
    threaded = survival_probability(
        params, SimOptions(box_radius=8, horizon=3.0, threads=4), 400, master_seed=8
    )
    assert serial == threaded
