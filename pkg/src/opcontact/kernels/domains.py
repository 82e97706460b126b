"""Finite simulation domains: explicit site lists with neighbor index tables.

A dense domain is a list of lattice sites plus, for each site and forward
direction, the index of its in-neighbor (site - e_i) and out-neighbor
(site + e_i), or -1 when the neighbor falls outside the domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DenseDomain:
    coords: np.ndarray  # (n_sites, d) int64
    in_nb: np.ndarray   # (n_sites, d) int64, index of site - e_i or -1
    out_nb: np.ndarray  # (n_sites, d) int64, index of site + e_i or -1

    @property
    def n_sites(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def index_of(self, site) -> int:
        key = tuple(int(c) for c in site)
        return self._lookup().get(key, -1)

    def _lookup(self):
        if not hasattr(self, "_lookup_cache"):
            object.__setattr__(
                self,
                "_lookup_cache",
                {tuple(int(c) for c in row): i for i, row in enumerate(self.coords)},
            )
        return self._lookup_cache


def _build(site_list) -> DenseDomain:
    coords = np.array(site_list, dtype=np.int64)
    n, d = coords.shape
    lookup = {tuple(int(c) for c in row): i for i, row in enumerate(coords)}
    in_nb = np.full((n, d), -1, dtype=np.int64)
    out_nb = np.full((n, d), -1, dtype=np.int64)
    for s, row in enumerate(site_list):
        for i in range(d):
            lo = list(row)
            lo[i] -= 1
            in_nb[s, i] = lookup.get(tuple(lo), -1)
            hi = list(row)
            hi[i] += 1
            out_nb[s, i] = lookup.get(tuple(hi), -1)
    return DenseDomain(coords, in_nb, out_nb)


def backward_cone(probe, depth: int) -> DenseDomain:
    """Sites x with probe - x in the nonnegative orthant and |probe - x|_1 <= depth.

    Only these sites can influence the probe through oriented edges, so for
    probe statistics the truncation error is exactly the box-truncation bias.
    """
    probe = tuple(int(c) for c in probe)
    d = len(probe)
    sites = []

    def rec(prefix, remaining):
        if len(prefix) == d - 1:
            for u in range(remaining + 1):
                sites.append(tuple(prefix) + (u,))
            return
        for u in range(remaining + 1):
            rec(prefix + [u], remaining - u)

    if d == 1:
        offsets = [(u,) for u in range(depth + 1)]
    else:
        rec([], depth)
        offsets = sites
    site_list = [tuple(p - u for p, u in zip(probe, off)) for off in offsets]
    site_list.sort()
    return _build(site_list)


def box(d: int, radius: int) -> DenseDomain:
    """The full box [-radius, radius]^d (dense; intended for small d and radius)."""
    rng = range(-radius, radius + 1)
    site_list = []

    def rec(prefix):
        if len(prefix) == d:
            site_list.append(tuple(prefix))
            return
        for c in rng:
            rec(prefix + [c])

    rec([])
    return _build(site_list)


def cone_depth_for_series_tail(t: float, a: float, rel_tol: float = 1e-4, max_depth: int = 400) -> int:
    """Smallest R with sum_{n>R} (t*a)^n/n! < rel_tol * e^{a*t}.

    The length-n oriented-path contribution to a probe mean is bounded by the
    n-th term of the exponential series with coefficient a = lam*d*p, so R
    bounds the influence depth to relative error rel_tol.
    """
    x = t * a
    target = rel_tol * np.exp(x)
    term = 1.0
    total = 1.0
    for n in range(1, max_depth + 1):
        term *= x / n
        total += term
        if np.exp(x) - total < target:
            return n
    return max_depth
