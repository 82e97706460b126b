"""Pure-python simulation kernels.

These are the reference algorithms: the compiled extension in ``_core.pyx``
consumes the identical draw sequence from the identical splitmix64 stream,
so for a given seed both backends produce bit-identical trajectories.

Draw order per contact-process event (I infected, dimension d, rate
R = I*(1 + lam*d)):

    w1 -> dt = -log(u53(w1)) / R        (stop if t + dt exceeds the horizon)
    w2 -> r = u53(w2) * (1 + lam*d)     (r < 1: recovery, else infection attempt)
    w3 -> index into the infected list
    w4 -> direction (infection attempts only)
    w5 -> thinning coin (coupled pairs only, and only when the edge is open)

The infected list is append-ordered with swap-with-last removal; both
backends maintain it identically.

The path process uses constant total rate n_sites*(1 + lam*d) with null
events (resets of already-zero sites, additions of zero values), which
matches its generator exactly.
"""

from __future__ import annotations

import math

import numpy as np

from ..rngtools import M64, mix64, u53

_GOLDEN = 0x9E3779B97F4A7C15

INT64_MAX = (1 << 63) - 1


def _next(state: int) -> tuple:
    state = (state + _GOLDEN) & M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return state, z ^ (z >> 31)


def _edge_open(env_seed: int, tail_words, direction_1based: int, threshold: int) -> bool:
    h = env_seed & M64
    for w in tail_words:
        h = mix64(h ^ (w & M64))
    h = mix64(h ^ direction_1based)
    return h < threshold


# ---------------------------------------------------------------------------
# sparse contact process (hash-set state on the box [-L, L]^d)
# ---------------------------------------------------------------------------

def contact_sparse_run(
    d, L, lam, direction, threshold, env_seed, offset, proc_seed, T,
    init_sites, pop_cap=0, event_budget=0, probe=None, record_probe=False,
    return_final=False, forced_open_edges=None, forced_state=-1,
):
    """One quenched contact-process run; returns a dict of outcomes.

    direction: 0 = forward (infection along open edges), 1 = dual (against them).
    forced_state: -1 = hashed environment, 0 = all closed, 1 = all open;
    forced_open_edges, when given, is a set of (tail_tuple, dir_1based) open
    edges overriding everything (two-site oracles and test doubles).
    """
    infected = [tuple(int(c) for c in s) for s in init_sites]
    pos = {s: i for i, s in enumerate(infected)}
    if len(pos) != len(infected):
        raise ValueError("initial infected set contains duplicates")
    offset = [int(o) for o in offset]
    state = proc_seed & M64
    t = 0.0
    boundary_hits = 0
    events = 0
    capped = False
    budget_hit = False
    probe_t = tuple(int(c) for c in probe) if probe is not None else None
    trace = []
    if record_probe and probe_t is not None:
        trace.append((0.0, probe_t in pos))
    rate_factor = 1.0 + lam * d
    while infected:
        R = len(infected) * rate_factor
        state, w = _next(state)
        dt = -math.log(u53(w)) / R
        if t + dt > T:
            t = T
            break
        t += dt
        events += 1
        state, w = _next(state)
        r = u53(w) * rate_factor
        state, w = _next(state)
        idx = min(len(infected) - 1, int(u53(w) * len(infected)))
        if r < 1.0:
            v = infected[idx]
            last = infected.pop()
            if idx < len(infected):
                infected[idx] = last
                pos[last] = idx
            del pos[v]
            if record_probe and v == probe_t:
                trace.append((t, False))
        else:
            state, w = _next(state)
            di = min(d - 1, int(u53(w) * d))
            v = infected[idx]
            if direction == 0:
                target = tuple(c + (1 if j == di else 0) for j, c in enumerate(v))
                tail = v
            else:
                target = tuple(c - (1 if j == di else 0) for j, c in enumerate(v))
                tail = target
            if any(abs(c) > L for c in target):
                boundary_hits += 1
                continue
            if target in pos:
                continue
            if forced_open_edges is not None:
                is_open = (tail, di + 1) in forced_open_edges
            elif forced_state == 1:
                is_open = True
            elif forced_state == 0:
                is_open = False
            else:
                is_open = _edge_open(
                    env_seed, [c + o for c, o in zip(tail, offset)], di + 1, threshold
                )
            if not is_open:
                continue
            pos[target] = len(infected)
            infected.append(target)
            if record_probe and target == probe_t:
                trace.append((t, True))
            if pop_cap and len(infected) >= pop_cap:
                capped = True
                break
        if event_budget and events >= event_budget:
            budget_hit = True
            break
    alive = len(infected) > 0
    return {
        "alive": alive,
        "extinction_time": None if alive else t,
        "final_time": t,
        "n_final": len(infected),
        "boundary_hits": boundary_hits,
        "events": events,
        "capped": capped,
        "budget_hit": budget_hit,
        "probe_final": (probe_t in pos) if probe_t is not None else False,
        "probe_trace": trace if record_probe else None,
        "final_sites": set(infected) if return_final else None,
    }


def contact_sparse_batch(
    d, L, lam, direction, threshold, env_state, env_fixed, offset,
    proc_state, n_replicas, T, init_sites, pop_cap=0, event_budget=0, probe=None,
    rep_start=0,
):
    """Replica batch of contact_sparse_run with per-replica child seeds."""
    alive = np.zeros(n_replicas, dtype=np.uint8)
    probe_final = np.zeros(n_replicas, dtype=np.uint8)
    ext_time = np.full(n_replicas, np.nan)
    boundary = np.zeros(n_replicas, dtype=np.int64)
    capped = np.zeros(n_replicas, dtype=np.uint8)
    for r in range(n_replicas):
        g = rep_start + r
        env_seed = env_state if env_fixed else mix64(env_state ^ g)
        res = contact_sparse_run(
            d, L, lam, direction, threshold, env_seed, offset,
            mix64(proc_state ^ g), T, init_sites,
            pop_cap=pop_cap, event_budget=event_budget, probe=probe,
        )
        alive[r] = res["alive"]
        probe_final[r] = res["probe_final"]
        if not res["alive"]:
            ext_time[r] = res["extinction_time"]
        boundary[r] = res["boundary_hits"]
        capped[r] = res["capped"] or res["budget_hit"]
    return alive, probe_final, ext_time, boundary, capped


def coupled_pair_run(
    d, L, lam_lo, lam_hi, direction, threshold, env_seed, offset, proc_seed, T,
    init_sites, pop_cap=0, check_inclusion=True, return_final=False,
):
    """Basic-coupling run of two infection rates on shared randomness.

    The lam_hi process drives the event stream; lam_lo infections are a
    thinning (coin < lam_lo/lam_hi) of the same open-edge attempts, and
    recoveries are shared, so infected(lo) is a subset of infected(hi) at
    every event time by construction.  With check_inclusion the subset
    relation is re-verified after every event.
    """
    if lam_lo > lam_hi:
        raise ValueError("lam_lo must not exceed lam_hi")
    hi = [tuple(int(c) for c in s) for s in init_sites]
    pos_hi = {s: i for i, s in enumerate(hi)}
    offset = [int(o) for o in offset]
    lo = set(pos_hi)
    state = proc_seed & M64
    t = 0.0
    capped = False
    inclusion_ok = True
    lo_alive_time = None
    rate_factor = 1.0 + lam_hi * d
    ratio = lam_lo / lam_hi
    while hi:
        R = len(hi) * rate_factor
        state, w = _next(state)
        dt = -math.log(u53(w)) / R
        if t + dt > T:
            t = T
            break
        t += dt
        state, w = _next(state)
        r = u53(w) * rate_factor
        state, w = _next(state)
        idx = min(len(hi) - 1, int(u53(w) * len(hi)))
        if r < 1.0:
            v = hi[idx]
            last = hi.pop()
            if idx < len(hi):
                hi[idx] = last
                pos_hi[last] = idx
            del pos_hi[v]
            lo.discard(v)
        else:
            state, w = _next(state)
            di = min(d - 1, int(u53(w) * d))
            v = hi[idx]
            if direction == 0:
                target = tuple(c + (1 if j == di else 0) for j, c in enumerate(v))
                tail = v
            else:
                target = tuple(c - (1 if j == di else 0) for j, c in enumerate(v))
                tail = target
            if any(abs(c) > L for c in target):
                continue
            if not _edge_open(env_seed, [c + o for c, o in zip(tail, offset)], di + 1, threshold):
                continue
            state, w = _next(state)
            coin = u53(w)
            if target not in pos_hi:
                pos_hi[target] = len(hi)
                hi.append(target)
            if coin < ratio and v in lo and target not in lo:
                lo.add(target)
            if pop_cap and len(hi) >= pop_cap:
                capped = True
                break
        if not lo and lo_alive_time is None:
            lo_alive_time = t
        if check_inclusion and not lo.issubset(pos_hi):
            inclusion_ok = False
    return {
        "alive_lo": bool(lo),
        "alive_hi": bool(hi),
        "extinction_time_lo": lo_alive_time,
        "extinction_time_hi": None if hi else t,
        "inclusion_ok": inclusion_ok,
        "capped": capped,
        "final_lo": set(lo) if return_final else None,
        "final_hi": set(pos_hi) if return_final else None,
    }


# ---------------------------------------------------------------------------
# dense-domain kernels (precomputed neighbor tables; used for probe statistics)
# ---------------------------------------------------------------------------

def _dense_open_edges(coords, nb, lam_direction, env_seed, offset, threshold, d):
    """Openness bitmap per (site, direction) for a dense domain.

    Forward mode (lam_direction 0): entry [s, i] is the edge with tail s.
    Dual mode: entry [s, i] is the edge into s from s - e_i (tail s - e_i).
    """
    n = coords.shape[0]
    offset = [int(o) for o in offset]
    out = np.zeros((n, d), dtype=bool)
    for s in range(n):
        for i in range(d):
            if lam_direction == 0:
                tail = [int(coords[s, j]) + offset[j] for j in range(d)]
            else:
                tail = [
                    int(coords[s, j]) - (1 if j == i else 0) + offset[j]
                    for j in range(d)
                ]
            out[s, i] = _edge_open(env_seed, tail, i + 1, threshold)
    return out


def contact_dense_batch(
    domain, lam, direction, threshold, env_state, env_fixed, offset,
    proc_state, n_replicas, T, init_mode, init_site, probe_idx, rep_start=0,
):
    """Replica batch of the contact process on a dense domain.

    init_mode 0: all sites infected; 1: the single site index init_site.
    Forward runs use out-neighbors (tail = source); dual runs use
    in-neighbors (tail = target).  Returns (probe_final, alive) arrays.
    """
    coords = domain.coords
    n, d = coords.shape
    nb = domain.out_nb if direction == 0 else domain.in_nb
    probe_final = np.zeros(n_replicas, dtype=np.uint8)
    alive = np.zeros(n_replicas, dtype=np.uint8)
    rate_factor = 1.0 + lam * d
    for rep in range(n_replicas):
        g = rep_start + rep
        env_seed = env_state if env_fixed else mix64(env_state ^ g)
        open_e = _dense_open_edges(coords, nb, direction, env_seed, offset, threshold, d)
        if init_mode == 0:
            infected = list(range(n))
        else:
            infected = [init_site]
        pos = np.full(n, -1, dtype=np.int64)
        for i, s in enumerate(infected):
            pos[s] = i
        state = mix64(proc_state ^ g)
        t = 0.0
        while infected:
            R = len(infected) * rate_factor
            state, w = _next(state)
            dt = -math.log(u53(w)) / R
            if t + dt > T:
                t = T
                break
            t += dt
            state, w = _next(state)
            r = u53(w) * rate_factor
            state, w = _next(state)
            idx = min(len(infected) - 1, int(u53(w) * len(infected)))
            if r < 1.0:
                v = infected[idx]
                last = infected.pop()
                if idx < len(infected):
                    infected[idx] = last
                    pos[last] = idx
                pos[v] = -1
            else:
                state, w = _next(state)
                di = min(d - 1, int(u53(w) * d))
                v = infected[idx]
                # forward: attempt along out-edge of v; dual: along in-edge
                tgt = nb[v, di]
                if tgt < 0:
                    continue
                if pos[tgt] >= 0:
                    continue
                # bitmap is indexed by the tail site in forward mode and by
                # the head site in dual mode; in both cases key (v, di) is the
                # edge being crossed
                if direction == 0:
                    if not open_e[v, di]:
                        continue
                else:
                    if not open_e[v, di]:
                        continue
                pos[tgt] = len(infected)
                infected.append(tgt)
        probe_final[rep] = 1 if (probe_idx >= 0 and pos[probe_idx] >= 0) else 0
        alive[rep] = 1 if infected else 0
    return probe_final, alive


def zeta_dense_run(domain, lam, threshold, env_seed, offset, proc_seed, T,
                   origin_idx, joint_eta=False, forced_state=-1):
    """One run of the integer path process on a dense domain (all sites start at 1).

    With joint_eta, a contact-process configuration is driven by the same
    clocks and its indicator is asserted against the support of the integer
    field after every event; a mismatch raises AssertionError.
    """
    coords = domain.coords
    n, d = coords.shape
    if forced_state == -1:
        open_in = _dense_open_edges(coords, domain.in_nb, 1, env_seed, offset, threshold, d)
    else:
        open_in = np.full((n, d), bool(forced_state))
    zeta = [1] * n
    eta = [1] * n if joint_eta else None
    overflow = False
    state = proc_seed & M64
    t = 0.0
    rate_factor = 1.0 + lam * d
    R = n * rate_factor
    while True:
        state, w = _next(state)
        dt = -math.log(u53(w)) / R
        if t + dt > T:
            break
        t += dt
        state, w = _next(state)
        r = u53(w) * rate_factor
        state, w = _next(state)
        s = min(n - 1, int(u53(w) * n))
        if r < 1.0:
            zeta[s] = 0
            if joint_eta:
                eta[s] = 0
        else:
            state, w = _next(state)
            di = min(d - 1, int(u53(w) * d))
            y = domain.in_nb[s, di]
            if y < 0 or not open_in[s, di]:
                continue
            add = zeta[y]
            if zeta[s] > INT64_MAX - add:
                zeta[s] = INT64_MAX
                overflow = True
            else:
                zeta[s] += add
            if joint_eta and eta[y] == 1:
                eta[s] = 1
        if joint_eta:
            for k in range(n):
                assert (eta[k] == 1) == (zeta[k] >= 1), "support/indicator coupling broken"
    return {
        "zeta": zeta,
        "zeta_origin": zeta[origin_idx],
        "overflow": overflow,
        "time": t,
        "eta": eta,
    }


def zeta_dense_batch(domain, lam, threshold, env_state, env_fixed, offset,
                     proc_state, n_replicas, T, origin_idx, rep_start=0):
    """Replica batch of the path process; returns (origin values, overflow flags)."""
    values = np.zeros(n_replicas)
    overflow = np.zeros(n_replicas, dtype=np.uint8)
    for rep in range(n_replicas):
        g = rep_start + rep
        env_seed = env_state if env_fixed else mix64(env_state ^ g)
        res = zeta_dense_run(
            domain, lam, threshold, env_seed, offset,
            mix64(proc_state ^ g), T, origin_idx,
        )
        values[rep] = float(res["zeta_origin"])
        overflow[rep] = res["overflow"]
    return values, overflow


# ---------------------------------------------------------------------------
# oriented walk pairs
# ---------------------------------------------------------------------------

def walk_pair_batch(d, N, n_traces, seed_state, checkpoints, stop_at_first=False,
                    record=False, rep_start=0):
    """Simulate pairs of independent oriented walks from a shared origin.

    Returns (theta, a_counts, b_counts, records) where theta is the first
    meeting index in [1, N] (-1 if none), a/b counts are the stick/split
    collision counts at each checkpoint, and records (record mode only) is a
    list of per-trace collision event lists [(index, is_stick), ...].
    """
    checkpoints = list(checkpoints)
    ncp = len(checkpoints)
    theta = np.full(n_traces, -1, dtype=np.int64)
    a_counts = np.zeros((n_traces, ncp), dtype=np.int64)
    b_counts = np.zeros((n_traces, ncp), dtype=np.int64)
    records = [] if record else None
    for tr in range(n_traces):
        state = mix64(seed_state ^ (rep_start + tr))
        diff = [0] * d
        nonzero = 0
        eq = True
        a_run = 0
        b_run = 0
        th = -1
        rec = [] if record else None
        cp_i = 0
        for i in range(N):
            state, w = _next(state)
            a = min(d - 1, int(u53(w) * d))
            state, w = _next(state)
            b = min(d - 1, int(u53(w) * d))
            if a != b:
                if diff[a] == 0:
                    nonzero += 1
                diff[a] += 1
                if diff[a] == 0:
                    nonzero -= 1
                if diff[b] == 0:
                    nonzero += 1
                diff[b] -= 1
                if diff[b] == 0:
                    nonzero -= 1
            new_eq = nonzero == 0
            if eq:
                if new_eq:
                    a_run += 1
                    if record:
                        rec.append((i, True))
                else:
                    b_run += 1
                    if record:
                        rec.append((i, False))
            if new_eq and th < 0 and i + 1 >= 1:
                th = i + 1
            eq = new_eq
            while cp_i < ncp and i + 1 == checkpoints[cp_i]:
                a_counts[tr, cp_i] = a_run
                b_counts[tr, cp_i] = b_run
                cp_i += 1
            if stop_at_first and th >= 0:
                break
        theta[tr] = th
        if not stop_at_first:
            while cp_i < ncp:
                a_counts[tr, cp_i] = a_run
                b_counts[tr, cp_i] = b_run
                cp_i += 1
        if record:
            records.append(rec)
    return theta, a_counts, b_counts, records
