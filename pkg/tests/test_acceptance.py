"""End-to-end acceptance suite.

Each test exercises one published claim at its stated scale and tolerance
and prints a PASS line with the measured numbers, so the whole run doubles
as a results table.
"""

import math

import numpy as np
import pytest

from opcontact import kernels
from opcontact.contact import SimOptions, check_self_duality, survival_probability
from opcontact.environment import (
    DirectedEdge,
    ModelParams,
    QuenchedEnvironment,
    count_open_paths_to_origin,
    edge_state,
    p_threshold,
)
from opcontact.estimator import quenched_annealed_compare, scaling_table
from opcontact.kernels import coupled_pair_run, zeta_dense_run
from opcontact.mean_field import integrate_numeric, solve_closed_form
from opcontact.path_process import analytic_mean_zeta, mean_zeta_origin
from opcontact.rngtools import label_state, seed_schedule
from opcontact.sir import (
    infect_marginal,
    infect_pair,
    sample_infection_frequencies,
    second_moment_bound,
)
from opcontact.walks import estimate_theta_tail, simulate_batch, simulate_pair
from tests.test_contact import two_site_occupation
from tests.test_sir import exact_second_moment_d2_n2


def _report(num, label, detail):
    print(f"[criterion {num:2d}] PASS  {label}: {detail}")


def test_criterion_01_zeta_mean_law():
    # annealed mean of the origin's integer value is exp((lam*d*p - 1) t)
    d, p = 3, 0.5
    replicas = 100_000
    opts = SimOptions()
    lines = []
    for mult in (0.4, 1.0, 1.6):
        lam = mult / (d * p)
        params = ModelParams(d, p, lam)
        for t in (0.5, 1.0, 2.0):
            est = mean_zeta_origin(params, t, replicas, opts, master_seed=101)
            target = analytic_mean_zeta(params, t)
            assert abs(est.mean - target) < 3 * est.se, (mult, t, est, target)
            assert est.truncated_runs == 0
            lines.append(f"a={mult:g},t={t:g}: {est.mean:.4f}~{target:.4f}(se {est.se:.4f})")
    _report(1, "origin mean law", "; ".join(lines))


def test_criterion_02_open_path_count_mean():
    # E(number of open oriented n-paths into the origin) = (dp)^n = 1 here
    d, p = 2, 0.5
    seeds = 10_000
    details = []
    for n in (1, 2, 3, 4):
        counts = np.array([
            count_open_paths_to_origin(
                QuenchedEnvironment(
                    params=ModelParams(d, p), env_seed=seed_schedule(202, "env", k)
                ),
                n,
            )
            for k in range(seeds)
        ], dtype=float)
        mean = counts.mean()
        se = counts.std(ddof=1) / math.sqrt(seeds)
        assert abs(mean - 1.0) < 3 * se, (n, mean, se)
        details.append(f"n={n}: {mean:.4f} (se {se:.4f})")
    _report(2, "path-count mean = (dp)^n = 1", "; ".join(details))


def test_criterion_03_infection_trial_closed_forms():
    trials = 1_000_000
    details = []
    for lam, p in ((1.0, 0.5), (2.0, 0.3)):
        params = ModelParams(2, p, lam)
        marginal, joint = sample_infection_frequencies(params, trials, seed=303)
        m, j = infect_marginal(params), infect_pair(params)
        if (lam, p) == (1.0, 0.5):
            assert m == pytest.approx(0.25)
            assert j == pytest.approx(1.0 / 12.0)
        assert abs(marginal - m) < 3 * math.sqrt(m * (1 - m) / trials)
        assert abs(joint - j) < 3 * math.sqrt(j * (1 - j) / trials)
        details.append(
            f"lam={lam:g},p={p:g}: {marginal:.5f}~{m:.5f}, {joint:.5f}~{j:.5f}"
        )
    _report(3, "infection closed forms", "; ".join(details))


def test_criterion_04_second_moment_bound():
    params = ModelParams(2, 0.5, 1.0)
    exact = exact_second_moment_d2_n2(params)
    from opcontact.sir import expected_path_count, pair_sum_second_moment

    assert pair_sum_second_moment(params, 2) == pytest.approx(exact, abs=1e-12)
    res = second_moment_bound(params, 2, 20_000, master_seed=404)
    assert abs(res.e_m - expected_path_count(params, 2)) < 3 * res.e_m_se
    assert abs(res.e_m2 - exact) < 3 * res.e_m2_se
    combined = math.hypot(res.direct_se, 2 * res.e_m_se + res.e_m2_se)
    assert res.direct >= res.bound - 3 * combined
    _report(
        4, "second-moment survival bound",
        f"E|M|={res.e_m:.4f}, E|M^2|={res.e_m2:.4f}~{exact:.4f}, "
        f"bound={res.bound:.4f} <= direct={res.direct:.4f}; pair-sum identity 1e-12",
    )


def test_criterion_05_walk_pair_laws():
    n = 200_000
    details = []
    for d in (2, 3, 4, 6):
        theta, _, _, _ = simulate_batch(d, 4, n, master_seed=505, stop_at_first=True)
        freq = float(np.mean(np.asarray(theta) == 1))
        target = 1.0 / d
        assert abs(freq - target) < 3 * math.sqrt(target * (1 - target) / n), d
        details.append(f"d={d}: {freq:.4f}~{target:.4f}")
    # degenerate d=1: the walks never separate
    t1 = simulate_pair(1, 50, seed=1)
    assert t1.theta == 1 and t1.split_count == 0 and t1.stick_count == 50
    # decomposition identity on every recorded trace
    for seed in range(1000):
        trace = simulate_pair(2, 60, seed=seed)
        taus, sigmas, rho = trace.decomposition()
        assert sum(sigmas) + rho == trace.split_count
        assert len(taus) == trace.stick_count
    _report(5, "P(theta=1)=1/d; d=1 degenerate; split = sum(sigma)+rho on 1000 traces",
            "; ".join(details))


def test_criterion_06_collision_tail_constant():
    n = 100_000
    horizon = 1600
    tails = {d: estimate_theta_tail(d, horizon, n, master_seed=606) for d in range(2, 7)}
    c_hat = max(t.c_hat for t in tails.values())
    t2, t6 = tails[2], tails[6]
    combined = math.hypot(4 * t2.se, 36 * t6.se)
    assert t6.c_hat <= t2.c_hat + 3 * combined
    _report(
        6, "collision tail d^2 P(2<=theta<=1600)",
        "; ".join(f"d={d}: {t.c_hat:.3f}" for d, t in tails.items())
        + f"; C_hat={c_hat:.3f}; d=6 <= d=2 within 3 SE ({combined:.3f})",
    )


def test_criterion_07_mean_field_dichotomy():
    for a in (0.5, 1.0, 2.0, 4.0):
        for t in (0.5, 2.0, 10.0, 20.0):
            assert abs(solve_closed_form(a, t) - integrate_numeric(a, t, 1e-3)) < 1e-8
    assert solve_closed_form(0.5, 20.0) < 1e-4
    assert abs(solve_closed_form(2.0, 50.0) - 0.5) < 1e-6
    _report(7, "mean-field dichotomy",
            "closed form = RK4 to 1e-8; a=0.5 -> <1e-4 at t=20; a=2 -> 0.5 +- 1e-6")


def test_criterion_08_self_duality():
    params = ModelParams(2, 0.7, 2.0)
    forward, dual, combined = check_self_duality(
        params, 1.0, 100_000, SimOptions(), master_seed=808
    )
    diff = forward.mean - dual.mean
    assert abs(diff) <= 3 * combined
    _report(
        8, "annealed self-duality",
        f"occupation {forward.mean:.4f} vs survival {dual.mean:.4f}, "
        f"|diff|={abs(diff):.4f} <= 3*{combined:.4f}",
    )


def test_criterion_09_sandwich_and_scaling():
    p = 0.5
    opts = SimOptions(box_radius=40, horizon=30.0, pop_cap=1000)
    rows = scaling_table(p, [2, 3, 4, 5], opts, 2000, eps=0.02, tol=0.05,
                         master_seed=909)
    details = []
    for r in rows:
        assert r.error is None, r
        width = r.ci[1] - r.ci[0]
        assert r.lambda_hat >= r.lower_bound - width, r
        details.append(f"d={r.d}: lam={r.lambda_hat:.3f} (floor {r.lower_bound:.3f}), "
                       f"dp*lam={r.dp_lambda:.3f}")
    by_d = {r.d: r for r in rows}
    w2 = 2 * p * (by_d[2].ci[1] - by_d[2].ci[0])
    w5 = 5 * p * (by_d[5].ci[1] - by_d[5].ci[0])
    assert by_d[5].dp_lambda <= by_d[2].dp_lambda + w2 + w5
    _report(9, "sandwich floor and dp*lambda trend", "; ".join(details))


def test_criterion_10_quenched_equals_annealed():
    rec = quenched_annealed_compare(
        3, 0.5, [101, 202, 303, 404, 505],
        SimOptions(box_radius=30, horizon=20.0, pop_cap=1000),
        replicas=2000, eps=0.02, tol=0.3, master_seed=6, n_origins=5,
    )
    assert rec.all_cis_overlap
    _report(
        10, "quenched vs annealed critical-rate intervals",
        "; ".join(
            f"seed {q.env_seed}: [{q.ci[0]:.3f},{q.ci[1]:.3f}]" for q in rec.quenched
        ) + f"; annealed [{rec.annealed.ci[0]:.3f},{rec.annealed.ci[1]:.3f}]; "
        f"max deviation {rec.max_pairwise_deviation:.3f}",
    )


def test_criterion_11_exact_oracles_and_coupling():
    pytest.importorskip("scipy")
    # (a) two-site chain occupation vs the matrix exponential, 1e6 runs
    lam, t, n = 1.3, 0.7, 1_000_000
    seed = next(
        s for s in range(100)
        if edge_state(
            QuenchedEnvironment(params=ModelParams(1, 0.5), env_seed=s),
            DirectedEdge((0,), 1),
        )
    )
    _, probe_final, _, _, _ = kernels.contact_sparse_batch(
        1, 1, lam, 0, p_threshold(0.5), seed, True, np.zeros(1, dtype=np.int64),
        label_state(1111, "proc"), n, t, np.array([[0]], dtype=np.int64),
        0, 0, (0,), 0,
    )
    freq = float(np.asarray(probe_final).mean())
    exact = two_site_occupation(lam, t)
    se = math.sqrt(exact * (1 - exact) / n)
    assert abs(freq - exact) < 3 * se

    # (b) attractiveness: infected(lam_lo) inside infected(lam_hi) on every run
    env = QuenchedEnvironment(params=ModelParams(2, 0.5), env_seed=17)
    for r in range(1000):
        res = coupled_pair_run(
            2, 5, 0.8, 1.5, 0, p_threshold(0.5), 17, [0, 0],
            seed_schedule(1112, "pair", r), 2.5, [(0, 0)],
        )
        assert res["inclusion_ok"]

    # (c) support coupling: support(zeta) == eta asserted after every event
    domain = kernels.backward_cone((0, 0), 4)
    for r in range(1000):
        zeta_dense_run(
            domain, 1.2, p_threshold(0.5), seed_schedule(1113, "env", r), [0, 0],
            seed_schedule(1113, "proc", r), 2.0, domain.index_of((0, 0)),
            joint_eta=True,
        )
    _report(
        11, "exact oracles",
        f"two-site occupation {freq:.5f}~{exact:.5f} (se {se:.5f}); "
        "inclusion and support couplings exact on 1000+1000 joint runs",
    )
