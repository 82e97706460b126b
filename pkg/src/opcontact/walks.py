"""Collision statistics of two independent oriented random walks.

Both walks step by a uniform forward unit vector from a shared origin.
The stick/split collision counts (same meeting vertex with equal or
unequal next steps) control the path-pair correlation in the survival
bound, and the tail of the first-meeting time theta yields the empirical
constant behind the large-d upper bound on the critical rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import kernels
from .errors import DivergenceError
from .rngtools import label_state


@dataclass
class WalkPairTrace:
    horizon: int
    theta: Optional[int]          # first j >= 1 with equal positions, None if none by N
    stick_count: int              # meetings followed by an equal step (r_d truncated)
    split_count: int              # meetings followed by unequal steps (k_d truncated)
    collisions: List[Tuple[int, bool]]  # (index, is_stick), every i with S_i = S_hat_i

    def decomposition(self):
        """(tau indices, sigma counts, rho) recovered from the collision record.

        tau_k are the stick times; sigma_k counts the splits strictly between
        consecutive sticks; rho counts the splits after the last stick.  By
        construction split_count == sum(sigma) + rho, asserted in tests.
        """
        taus = [i for i, stick in self.collisions if stick]
        sigmas = []
        prev = -1
        for tau in taus:
            sigmas.append(
                sum(1 for i, stick in self.collisions if not stick and prev < i < tau)
            )
            prev = tau
        rho = sum(1 for i, stick in self.collisions if not stick and i > prev)
        return taus, sigmas, rho


def simulate_pair(d: int, horizon: int, seed: int) -> WalkPairTrace:
    """One trace with its full collision record, deterministic given seed."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    theta, a, b, rec = kernels.walk_pair_batch(
        d, horizon, 1, seed, [horizon], record=True
    )
    th = int(theta[0])
    return WalkPairTrace(
        horizon=horizon,
        theta=None if th < 0 else th,
        stick_count=int(a[0, -1]),
        split_count=int(b[0, -1]),
        collisions=rec[0],
    )


def simulate_batch(d: int, horizon: int, replicas: int, master_seed: int = 0,
                   checkpoints=None, record: bool = False, stop_at_first: bool = False):
    """Batch of traces; returns (theta, stick_counts, split_counts, records)."""
    if checkpoints is None:
        checkpoints = [horizon]
    state = label_state(master_seed, "walks")
    return kernels.walk_pair_batch(
        d, horizon, replicas, state, list(checkpoints),
        stop_at_first=stop_at_first, record=record,
    )


@dataclass
class ThetaTailEstimate:
    d: int
    horizon: int
    estimate: float   # P(2 <= theta <= N)
    se: float
    c_hat: float      # d^2 * estimate
    replicas: int
    theta_one: float  # P(theta = 1), for the 1/d law


def estimate_theta_tail(d: int, horizon: int, replicas: int,
                        master_seed: int = 0) -> ThetaTailEstimate:
    """Truncated tail P(2 <= theta <= N) and the implied constant d^2 * P."""
    theta, _, _, _ = simulate_batch(
        d, horizon, replicas, master_seed, stop_at_first=True
    )
    theta = np.asarray(theta)
    hit = ((theta >= 2) & (theta <= horizon)).astype(float)
    est = float(hit.mean())
    se = math.sqrt(max(est * (1 - est), 0.0) / replicas)
    return ThetaTailEstimate(
        d=d, horizon=horizon, estimate=est, se=se, c_hat=d * d * est,
        replicas=replicas, theta_one=float((theta == 1).mean()),
    )


@dataclass
class MomentEstimate:
    d: int
    p: float
    lam: float
    horizons: List[int]
    estimates: List[float]
    ses: List[float]

    def stabilized(self, factor: float = 2.0) -> bool:
        """Whether the last doubling moved the estimate by <= factor * combined SE."""
        if len(self.estimates) < 2:
            return False
        delta = abs(self.estimates[-1] - self.estimates[-2])
        return delta <= factor * math.hypot(self.ses[-1], self.ses[-2])


def collision_moment(d: int, p: float, lam: float, horizons, replicas: int,
                 master_seed: int = 0) -> MomentEstimate:
    """Truncated MC estimate of E[2^{split} * ((lam+1)/(lam*p))^{stick}].

    Reported at each horizon in `horizons` (shared traces) to expose
    stabilization vs divergence.  d=1 is rejected: the walks coincide
    forever, so the stick count is infinite almost surely.
    """
    if d == 1:
        raise DivergenceError("d=1: the walks coincide forever, the moment diverges")
    horizons = sorted(int(h) for h in horizons)
    n = horizons[-1]
    _, a_counts, b_counts, _ = simulate_batch(
        d, n, replicas, master_seed, checkpoints=horizons
    )
    q = (lam + 1.0) / (lam * p)
    estimates, ses = [], []
    for j in range(len(horizons)):
        vals = np.exp(
            b_counts[:, j] * math.log(2.0) + a_counts[:, j] * math.log(q)
        )
        estimates.append(float(vals.mean()))
        ses.append(float(vals.std(ddof=1) / math.sqrt(replicas)))
    return MomentEstimate(d, p, lam, horizons, estimates, ses)


def upper_bound_lambda(d: int, p: float, c_hat: float) -> Optional[float]:
    """1/(d*p - 2*p*c_hat/d - 1), or None when the denominator is not positive.

    Valid only in the large-d regime; with c_hat = 0 it degenerates to the
    no-collision bound 1/(d*p - 1).
    """
    denom = d * p - 2.0 * p * c_hat / d - 1.0
    if denom <= 0.0:
        return None
    return 1.0 / denom
