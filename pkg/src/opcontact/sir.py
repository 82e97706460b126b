"""Static infection-trial percolation used for the survival lower bound.

Each vertex x carries a removal time Y_x ~ Exp(1); each (vertex, direction)
carries an attempt time U_{x,i} ~ Exp(lam).  Vertex x infects x + e_i iff
the edge is open and U_{x,i} <= Y_x, with marginal probability
lam*p/(1+lam).  The count of fully-infecting oriented paths of length n
feeds the Cauchy-Schwarz lower bound on survival.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .environment import DirectedEdge, ModelParams, QuenchedEnvironment, edge_state
from .errors import BudgetExceededError
from .rngtools import hash_words, u53

PATH_ENUM_BUDGET = 10_000_000


def infect_marginal(params: ModelParams) -> float:
    """P(x infects a fixed out-neighbor): lam*p/(1+lam)."""
    lam, p = params.lam, params.p
    return lam * p / (1.0 + lam)


def infect_pair(params: ModelParams) -> float:
    """P(x infects two fixed out-neighbors): 2*lam^2*p^2/((2*lam+1)*(lam+1))."""
    lam, p = params.lam, params.p
    return 2.0 * lam * lam * p * p / ((2.0 * lam + 1.0) * (lam + 1.0))


@dataclass
class InfectionTrialField:
    """One joint realization of (Y, U, edge field), sampled lazily and memoized."""

    params: ModelParams
    trial_seed: int
    env: Optional[QuenchedEnvironment] = None
    force_infect: Optional[bool] = None
    _memo: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.env is None:
            self.env = QuenchedEnvironment(
                params=ModelParams(self.params.d, self.params.p),
                env_seed=hash_words(self.trial_seed, [0x45]),
            )

    def recovery_time(self, x) -> float:
        key = ("Y", tuple(x))
        if key not in self._memo:
            w = hash_words(self.trial_seed, [0x59] + [int(c) for c in x])
            self._memo[key] = -math.log(u53(w))
        return self._memo[key]

    def attempt_time(self, x, i: int) -> float:
        key = ("U", tuple(x), i)
        if key not in self._memo:
            w = hash_words(self.trial_seed, [0x55] + [int(c) for c in x] + [i])
            self._memo[key] = -math.log(u53(w)) / self.params.lam
        return self._memo[key]


def infects(field_: InfectionTrialField, x, i: int) -> bool:
    """Whether x infects x + e_i (open edge and attempt before removal)."""
    if field_.force_infect is not None:
        return field_.force_infect
    x = tuple(int(c) for c in x)
    if not edge_state(field_.env, DirectedEdge(x, i)):
        return False
    return field_.attempt_time(x, i) <= field_.recovery_time(x)


def count_infection_paths(field_: InfectionTrialField, n: int) -> int:
    """|M_n|: fully-infecting oriented paths of length n from the origin.

    Memoized on (vertex, remaining) since the per-(vertex, direction) trial
    is fixed once sampled; the raw d^n space is budget-guarded.
    """
    d = field_.params.d
    if d ** n > PATH_ENUM_BUDGET:
        raise BudgetExceededError(f"d^n = {d}^{n} exceeds enumeration budget")
    memo = {}

    def rec(x, k):
        if k == 0:
            return 1
        key = (x, k)
        if key in memo:
            return memo[key]
        total = 0
        for i in range(1, d + 1):
            if infects(field_, x, i):
                y = tuple(c + (1 if j == i - 1 else 0) for j, c in enumerate(x))
                total += rec(y, k - 1)
        memo[key] = total
        return total

    return rec((0,) * d, n)


@dataclass
class SecondMomentResult:
    e_m: float
    e_m_se: float
    e_m2: float
    e_m2_se: float
    bound: float
    direct: float
    direct_se: float
    fields: int


def second_moment_bound(params: ModelParams, n: int, fields: int,
                        master_seed: int = 0) -> SecondMomentResult:
    """MC estimates of E|M_n|, E|M_n|^2, the Cauchy-Schwarz lower bound
    (E|M_n|)^2/E|M_n|^2 on P(|M_n|>0), and the direct survival frequency."""
    counts = np.empty(fields, dtype=np.int64)
    for k in range(fields):
        f = InfectionTrialField(params, trial_seed=hash_words(master_seed, [0x46, k]))
        counts[k] = count_infection_paths(f, n)
    counts_f = counts.astype(float)
    e_m = float(counts_f.mean())
    e_m_se = float(counts_f.std(ddof=1) / math.sqrt(fields))
    sq = counts_f ** 2
    e_m2 = float(sq.mean())
    e_m2_se = float(sq.std(ddof=1) / math.sqrt(fields))
    pos = (counts > 0).astype(float)
    direct = float(pos.mean())
    direct_se = math.sqrt(max(direct * (1 - direct), 0.0) / fields)
    bound = (e_m ** 2 / e_m2) if e_m2 > 0 else 0.0
    return SecondMomentResult(e_m, e_m_se, e_m2, e_m2_se, bound, direct, direct_se, fields)


def sample_infection_frequencies(params: ModelParams, trials: int, seed: int = 0):
    """Vectorized i.i.d. trials of (x => y1) and (x => y1, x => y2).

    Each trial draws a fresh (Y, U_1, U_2, edge_1, edge_2) block; returns
    (marginal frequency, joint frequency) with trial count `trials`.
    """
    rng = np.random.default_rng(seed)
    y = rng.exponential(1.0, trials)
    u1 = rng.exponential(1.0 / params.lam, trials)
    u2 = rng.exponential(1.0 / params.lam, trials)
    x1 = rng.random(trials) < params.p
    x2 = rng.random(trials) < params.p
    i1 = x1 & (u1 <= y)
    i2 = x2 & (u2 <= y)
    return float(i1.mean()), float((i1 & i2).mean())


def path_vertices(steps, d: int):
    """Vertex sequence of an oriented path from the origin given 1-based steps."""
    x = [0] * d
    out = [tuple(x)]
    for s in steps:
        x[s - 1] += 1
        out.append(tuple(x))
    return out


def theoretical_pair_correlation(params: ModelParams, steps_a, steps_b) -> float:
    """Exact probability that two oriented paths from the origin both fully infect.

    Counts same-vertex overlaps: a shared step (same vertex, same direction)
    contributes one marginal factor; a split (same vertex, different
    directions) contributes the pair factor; all remaining steps are
    independent marginals.  Oriented paths can only share vertices at equal
    step indices, so this decomposition is exact.
    """
    if len(steps_a) != len(steps_b):
        raise ValueError("paths must have equal length")
    n = len(steps_a)
    d = params.d
    va = path_vertices(steps_a, d)
    vb = path_vertices(steps_b, d)
    shared = sum(1 for i in range(n) if va[i] == vb[i] and steps_a[i] == steps_b[i])
    split = sum(1 for i in range(n) if va[i] == vb[i] and steps_a[i] != steps_b[i])
    q1 = infect_marginal(params)
    q2 = infect_pair(params)
    return q1 ** (2 * n - shared - 2 * split) * q2 ** split


def pair_sum_second_moment(params: ModelParams, n: int) -> float:
    """E|M_n|^2 as the exact sum of pair correlations over all path pairs."""
    d = params.d
    if d ** (2 * n) > PATH_ENUM_BUDGET:
        raise BudgetExceededError("path-pair enumeration over budget")
    from itertools import product

    paths = list(product(range(1, d + 1), repeat=n))
    total = 0.0
    for a in paths:
        for b in paths:
            total += theoretical_pair_correlation(params, a, b)
    return total


def expected_path_count(params: ModelParams, n: int) -> float:
    """E|M_n| = (d * lam*p/(1+lam))^n by linearity over the d^n paths."""
    return (params.d * infect_marginal(params)) ** n
