# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled simulation kernels.

Mirrors kernels/py_core.py exactly: same splitmix64 streams, same draw
order, same data-structure discipline (append-ordered infected list with
swap-with-last removal), so both backends are bit-identical per seed.
"""

from libc.math cimport log
from libc.stdint cimport uint64_t, int64_t, uint8_t
from libcpp.vector cimport vector
from libcpp.unordered_map cimport unordered_map

import numpy as np
cimport numpy as cnp

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef int64_t INT64_MAX_C = 0x7FFFFFFFFFFFFFFFLL


cdef inline uint64_t _fin(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t mix64(uint64_t z) nogil:
    return _fin(z + GOLDEN)


cdef inline uint64_t stream_next(uint64_t* state) nogil:
    state[0] += GOLDEN
    return _fin(state[0])


cdef inline double u53(uint64_t w) nogil:
    return ((w >> 11) + 0.5) * (1.0 / 9007199254740992.0)


cdef inline bint edge_open(uint64_t env_seed, int64_t* tail, int d, int dir1,
                           uint64_t threshold) nogil:
    cdef uint64_t h = env_seed
    cdef int j
    for j in range(d):
        h = mix64(h ^ (<uint64_t> tail[j]))
    h = mix64(h ^ (<uint64_t> dir1))
    return h < threshold


def contact_sparse_batch(
    int d, long L, double lam, int direction, object threshold_obj,
    object env_state_obj, bint env_fixed, cnp.ndarray[cnp.int64_t, ndim=1] offset,
    object proc_state_obj, long n_replicas, double T,
    cnp.ndarray[cnp.int64_t, ndim=2] init_sites,
    long pop_cap=0, long event_budget=0, object probe=None, long rep_start=0,
):
    cdef uint64_t threshold = <uint64_t> (threshold_obj & ((1 << 64) - 1))
    cdef uint64_t env_state = <uint64_t> env_state_obj
    cdef uint64_t proc_state = <uint64_t> proc_state_obj
    cdef long side = 2 * L + 1
    cdef int j
    # encoding strides; wrapper guarantees side**d fits in int64
    cdef int64_t[16] stride
    cdef int64_t s = 1
    for j in range(d):
        stride[j] = s
        s *= side

    cdef cnp.ndarray[cnp.uint8_t, ndim=1] alive = np.zeros(n_replicas, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] probe_final = np.zeros(n_replicas, dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ext_time = np.full(n_replicas, np.nan)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] boundary = np.zeros(n_replicas, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] capped = np.zeros(n_replicas, dtype=np.uint8)

    cdef bint has_probe = probe is not None
    cdef int64_t probe_code = 0
    cdef int64_t[16] probe_c
    if has_probe:
        for j in range(d):
            probe_c[j] = probe[j]
            probe_code += (probe_c[j] + L) * stride[j]

    cdef int64_t n_init = init_sites.shape[0]
    cdef vector[int64_t] init_codes
    cdef int64_t k, code
    for k in range(n_init):
        code = 0
        for j in range(d):
            code += (init_sites[k, j] + L) * stride[j]
        init_codes.push_back(code)

    cdef vector[int64_t] infected
    cdef unordered_map[int64_t, int64_t] pos
    cdef uint64_t env_seed, state, w
    cdef long rep, events
    cdef double t, rate_factor = 1.0 + lam * d, R, dt, r
    cdef int64_t idx, I, v, target, last, bhits
    cdef int di
    cdef bint was_capped, budget_hit, out_of_box
    cdef int64_t[16] vc, tailc
    cdef int64_t rem

    for rep in range(n_replicas):
        env_seed = env_state if env_fixed else mix64(env_state ^ (<uint64_t> (rep_start + rep)))
        state = mix64(proc_state ^ (<uint64_t> (rep_start + rep)))
        infected.clear()
        pos.clear()
        for k in range(n_init):
            pos[init_codes[k]] = k
            infected.push_back(init_codes[k])
        t = 0.0
        bhits = 0
        events = 0
        was_capped = False
        budget_hit = False
        while infected.size() > 0:
            I = <int64_t> infected.size()
            R = I * rate_factor
            w = stream_next(&state)
            dt = -log(u53(w)) / R
            if t + dt > T:
                t = T
                break
            t += dt
            events += 1
            w = stream_next(&state)
            r = u53(w) * rate_factor
            w = stream_next(&state)
            idx = <int64_t> (u53(w) * I)
            if idx > I - 1:
                idx = I - 1
            if r < 1.0:
                v = infected[idx]
                last = infected[infected.size() - 1]
                infected.pop_back()
                if idx < <int64_t> infected.size():
                    infected[idx] = last
                    pos[last] = idx
                pos.erase(v)
            else:
                w = stream_next(&state)
                di = <int> (u53(w) * d)
                if di > d - 1:
                    di = d - 1
                v = infected[idx]
                # decode coordinates of v
                rem = v
                for j in range(d):
                    vc[j] = rem % side - L
                    rem = rem // side
                out_of_box = False
                if direction == 0:
                    if vc[di] + 1 > L:
                        out_of_box = True
                    target = v + stride[di]
                else:
                    if vc[di] - 1 < -L:
                        out_of_box = True
                    target = v - stride[di]
                if out_of_box:
                    bhits += 1
                    continue
                if pos.count(target):
                    continue
                for j in range(d):
                    tailc[j] = vc[j] + offset[j]
                if direction == 1:
                    tailc[di] -= 1
                if not edge_open(env_seed, tailc, d, di + 1, threshold):
                    continue
                pos[target] = <int64_t> infected.size()
                infected.push_back(target)
                if pop_cap > 0 and <long> infected.size() >= pop_cap:
                    was_capped = True
                    break
            if event_budget > 0 and events >= event_budget:
                budget_hit = True
                break
        alive[rep] = 1 if infected.size() > 0 else 0
        if has_probe:
            probe_final[rep] = 1 if pos.count(probe_code) else 0
        if infected.size() == 0:
            ext_time[rep] = t
        boundary[rep] = bhits
        capped[rep] = 1 if (was_capped or budget_hit) else 0
    return alive, probe_final, ext_time, boundary, capped


def contact_dense_batch(
    object domain, double lam, int direction, object threshold_obj,
    object env_state_obj, bint env_fixed, cnp.ndarray[cnp.int64_t, ndim=1] offset,
    object proc_state_obj, long n_replicas, double T,
    int init_mode, long init_site, long probe_idx, long rep_start=0,
):
    cdef uint64_t threshold = <uint64_t> (threshold_obj & ((1 << 64) - 1))
    cdef uint64_t env_state = <uint64_t> env_state_obj
    cdef uint64_t proc_state = <uint64_t> proc_state_obj
    cdef cnp.ndarray[cnp.int64_t, ndim=2] coords = np.ascontiguousarray(domain.coords)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] nb = np.ascontiguousarray(
        domain.out_nb if direction == 0 else domain.in_nb)
    cdef long n = coords.shape[0]
    cdef int d = coords.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] probe_final = np.zeros(n_replicas, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] alive = np.zeros(n_replicas, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] open_e = np.zeros((n, d), dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] pos = np.empty(n, dtype=np.int64)
    cdef vector[int64_t] infected
    cdef uint64_t env_seed, state, w
    cdef long rep, sidx
    cdef int j, di
    cdef double t, rate_factor = 1.0 + lam * d, R, dt, r
    cdef int64_t idx, I, v, tgt, last
    cdef int64_t[16] tailc

    for rep in range(n_replicas):
        env_seed = env_state if env_fixed else mix64(env_state ^ (<uint64_t> (rep_start + rep)))
        for sidx in range(n):
            for di in range(d):
                for j in range(d):
                    tailc[j] = coords[sidx, j] + offset[j]
                if direction == 1:
                    tailc[di] -= 1
                open_e[sidx, di] = 1 if edge_open(env_seed, tailc, d, di + 1, threshold) else 0
        infected.clear()
        if init_mode == 0:
            for sidx in range(n):
                pos[sidx] = sidx
                infected.push_back(sidx)
        else:
            for sidx in range(n):
                pos[sidx] = -1
            pos[init_site] = 0
            infected.push_back(init_site)
        state = mix64(proc_state ^ (<uint64_t> (rep_start + rep)))
        t = 0.0
        while infected.size() > 0:
            I = <int64_t> infected.size()
            R = I * rate_factor
            w = stream_next(&state)
            dt = -log(u53(w)) / R
            if t + dt > T:
                t = T
                break
            t += dt
            w = stream_next(&state)
            r = u53(w) * rate_factor
            w = stream_next(&state)
            idx = <int64_t> (u53(w) * I)
            if idx > I - 1:
                idx = I - 1
            if r < 1.0:
                v = infected[idx]
                last = infected[infected.size() - 1]
                infected.pop_back()
                if idx < <int64_t> infected.size():
                    infected[idx] = last
                    pos[last] = idx
                pos[v] = -1
            else:
                w = stream_next(&state)
                di = <int> (u53(w) * d)
                if di > d - 1:
                    di = d - 1
                v = infected[idx]
                tgt = nb[v, di]
                if tgt < 0:
                    continue
                if pos[tgt] >= 0:
                    continue
                if not open_e[v, di]:
                    continue
                pos[tgt] = <int64_t> infected.size()
                infected.push_back(tgt)
        probe_final[rep] = 1 if (probe_idx >= 0 and pos[probe_idx] >= 0) else 0
        alive[rep] = 1 if infected.size() > 0 else 0
    return probe_final, alive


def zeta_dense_batch(
    object domain, double lam, object threshold_obj,
    object env_state_obj, bint env_fixed, cnp.ndarray[cnp.int64_t, ndim=1] offset,
    object proc_state_obj, long n_replicas, double T, long origin_idx, long rep_start=0,
):
    cdef uint64_t threshold = <uint64_t> (threshold_obj & ((1 << 64) - 1))
    cdef uint64_t env_state = <uint64_t> env_state_obj
    cdef uint64_t proc_state = <uint64_t> proc_state_obj
    cdef cnp.ndarray[cnp.int64_t, ndim=2] coords = np.ascontiguousarray(domain.coords)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] in_nb = np.ascontiguousarray(domain.in_nb)
    cdef long n = coords.shape[0]
    cdef int d = coords.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] values = np.zeros(n_replicas)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] overflow = np.zeros(n_replicas, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] open_in = np.zeros((n, d), dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] zeta = np.empty(n, dtype=np.int64)
    cdef uint64_t env_seed, state, w
    cdef long rep, sidx
    cdef int j, di
    cdef double t, rate_factor = 1.0 + lam * d, R, dt, r
    cdef int64_t s, y, add
    cdef bint ovf
    cdef int64_t[16] tailc

    R = n * rate_factor
    for rep in range(n_replicas):
        env_seed = env_state if env_fixed else mix64(env_state ^ (<uint64_t> (rep_start + rep)))
        for sidx in range(n):
            for di in range(d):
                for j in range(d):
                    tailc[j] = coords[sidx, j] + offset[j]
                tailc[di] -= 1
                open_in[sidx, di] = 1 if edge_open(env_seed, tailc, d, di + 1, threshold) else 0
        for sidx in range(n):
            zeta[sidx] = 1
        state = mix64(proc_state ^ (<uint64_t> (rep_start + rep)))
        t = 0.0
        ovf = False
        while True:
            w = stream_next(&state)
            dt = -log(u53(w)) / R
            if t + dt > T:
                break
            t += dt
            w = stream_next(&state)
            r = u53(w) * rate_factor
            w = stream_next(&state)
            s = <int64_t> (u53(w) * n)
            if s > n - 1:
                s = n - 1
            if r < 1.0:
                zeta[s] = 0
            else:
                w = stream_next(&state)
                di = <int> (u53(w) * d)
                if di > d - 1:
                    di = d - 1
                y = in_nb[s, di]
                if y < 0 or not open_in[s, di]:
                    continue
                add = zeta[y]
                if zeta[s] > INT64_MAX_C - add:
                    zeta[s] = INT64_MAX_C
                    ovf = True
                else:
                    zeta[s] += add
        values[rep] = <double> zeta[origin_idx]
        overflow[rep] = 1 if ovf else 0
    return values, overflow


def walk_pair_batch(int d, long N, long n_traces, object seed_state_obj,
                    object checkpoints, bint stop_at_first=False, bint record=False,
                    long rep_start=0):
    cdef uint64_t seed_state = <uint64_t> seed_state_obj
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cps = np.asarray(checkpoints, dtype=np.int64)
    cdef long ncp = cps.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] theta = np.full(n_traces, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] a_counts = np.zeros((n_traces, ncp), dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] b_counts = np.zeros((n_traces, ncp), dtype=np.int64)
    cdef vector[int64_t] rec_idx
    cdef vector[uint8_t] rec_stick
    cdef vector[int64_t] rec_offsets
    cdef uint64_t state, w
    cdef long tr, i, cp_i
    cdef int a, b, nonzero
    cdef bint eq, new_eq
    cdef int64_t a_run, b_run, th
    cdef int64_t[64] diff

    for tr in range(n_traces):
        state = mix64(seed_state ^ (<uint64_t> (rep_start + tr)))
        for a in range(d):
            diff[a] = 0
        nonzero = 0
        eq = True
        a_run = 0
        b_run = 0
        th = -1
        cp_i = 0
        if record:
            rec_offsets.push_back(<int64_t> rec_idx.size())
        for i in range(N):
            w = stream_next(&state)
            a = <int> (u53(w) * d)
            if a > d - 1:
                a = d - 1
            w = stream_next(&state)
            b = <int> (u53(w) * d)
            if b > d - 1:
                b = d - 1
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
                        rec_idx.push_back(i)
                        rec_stick.push_back(1)
                else:
                    b_run += 1
                    if record:
                        rec_idx.push_back(i)
                        rec_stick.push_back(0)
            if new_eq and th < 0:
                th = i + 1
            eq = new_eq
            while cp_i < ncp and i + 1 == cps[cp_i]:
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
    records = None
    if record:
        rec_offsets.push_back(<int64_t> rec_idx.size())
        records = []
        for tr in range(n_traces):
            lo = rec_offsets[tr]
            hi = rec_offsets[tr + 1]
            records.append([(int(rec_idx[k]), bool(rec_stick[k])) for k in range(lo, hi)])
    return theta, a_counts, b_counts, records
