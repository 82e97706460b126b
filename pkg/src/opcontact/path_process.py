"""Integer-valued path process coupled to the contact process.

Each site's value resets to 0 at rate 1 and, per open in-edge, jumps to
value + in-neighbor value at rate lam.  Its support is exactly a contact
process from the all-infected start, and its annealed site mean is the
closed form exp((lam*d*p - 1) * t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from . import kernels
from .contact import ContactConfiguration, Estimate, SimOptions, _run_chunked
from .environment import ModelParams, QuenchedEnvironment, p_threshold
from .rngtools import label_state


@dataclass
class PathProcessConfiguration:
    values: Dict[Tuple[int, ...], int]
    time: float
    overflowed: bool = False


def run_path_process(env: QuenchedEnvironment, lam: float, opts: SimOptions,
                     probe=None, joint_eta: bool = False) -> PathProcessConfiguration:
    """One quenched run on the backward cone of the probe, all sites starting at 1."""
    d = env.params.d
    if probe is None:
        probe = (0,) * d
    domain = kernels.backward_cone(probe, opts.box_radius)
    forced = -1 if env.forced is None else (1 if env.forced else 0)
    res = kernels.zeta_dense_run(
        domain, lam, p_threshold(env.params.p), env.env_seed,
        list(env.origin_offset), opts.rng_seed, opts.horizon,
        domain.index_of(probe), joint_eta=joint_eta, forced_state=forced,
    )
    values = {
        tuple(int(c) for c in domain.coords[i]): res["zeta"][i]
        for i in range(domain.n_sites)
    }
    return PathProcessConfiguration(values=values, time=res["time"], overflowed=res["overflow"])


def coupled_eta_view(config: PathProcessConfiguration) -> ContactConfiguration:
    """The contact configuration carried by the support of the integer field."""
    return ContactConfiguration(
        infected=frozenset(x for x, v in config.values.items() if v >= 1),
        time=config.time,
    )


def mean_zeta_origin(params: ModelParams, t: float, replicas: int,
                     opts: SimOptions, master_seed: int = 0) -> Estimate:
    """Annealed MC mean of the origin value at time t (fresh environment per replica).

    Runs whose counters saturated are discarded from the mean; the discard
    rate is reported through Estimate.truncated_runs and should stay below
    0.1% at the small times where the mean law is checked.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    d = params.d
    if t == 0.0:
        return Estimate(1.0, 0.0, replicas)
    depth = kernels.cone_depth_for_series_tail(t, params.lam * d * params.p)
    domain = kernels.backward_cone((0,) * d, depth)
    origin_idx = domain.index_of((0,) * d)
    env_state = label_state(master_seed, "env")
    proc_state = label_state(master_seed, "proc")
    offset = np.zeros(d, dtype=np.int64)
    parts = _run_chunked(
        kernels.zeta_dense_batch, replicas, opts.threads,
        lambda start, count: (
            domain, params.lam, p_threshold(params.p), env_state, False,
            offset, proc_state, count, t, origin_idx, start,
        ),
    )
    values = np.concatenate([np.asarray(p[0]) for p in parts])
    overflow = np.concatenate([np.asarray(p[1]) for p in parts]).astype(bool)
    kept = values[~overflow]
    n = len(kept)
    mean = float(np.mean(kept))
    se = float(np.std(kept, ddof=1) / math.sqrt(n)) if n > 1 else float("inf")
    return Estimate(mean, se, n, truncated_runs=int(overflow.sum()))


def analytic_mean_zeta(params: ModelParams, t: float) -> float:
    """Closed-form annealed origin mean exp((lam*d*p - 1) * t)."""
    return math.exp((params.lam * params.d * params.p - 1.0) * t)


def analytic_mean_zeta_series(params: ModelParams, t: float, n_terms: int) -> float:
    """Partial sum e^{-t} * sum_{n<=N} (t*lam*d*p)^n / n! of the same mean."""
    x = t * params.lam * params.d * params.p
    term = 1.0
    total = 1.0
    for n in range(1, n_terms + 1):
        term *= x / n
        total += term
    return math.exp(-t) * total
