"""Compare the compiled kernels against the pure-python fallback.

Both backends draw identical streams, so timings are like-for-like; the
script also re-checks bit-identity of the outputs it times.

Usage: python benchmarks/benchmark_kernels.py [--replicas N]
"""

import argparse
import time

import numpy as np

from opcontact.environment import p_threshold
from opcontact.kernels import backward_cone, py_core
from opcontact.rngtools import label_state

try:
    from opcontact.kernels import _core
except ImportError:
    _core = None


def _time(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - t0, out


def _sparse_args(replicas):
    return (
        2, 20, 1.5, 0, p_threshold(0.5), label_state(1, "env"), False,
        np.zeros(2, dtype=np.int64), label_state(1, "proc"), replicas, 8.0,
        np.array([[0, 0]], dtype=np.int64), 2000, 0, None, 0,
    )


def _dense_args(replicas):
    domain = backward_cone((0, 0, 0), 8)
    idx = domain.index_of((0, 0, 0))
    return (
        domain, 1.0, 0, p_threshold(0.5), label_state(2, "env"), False,
        np.zeros(3, dtype=np.int64), label_state(2, "proc"), replicas, 1.0,
        0, idx, idx, 0,
    )


def _zeta_args(replicas):
    domain = backward_cone((0, 0, 0), 8)
    return (
        domain, 1.0, p_threshold(0.5), label_state(3, "env"), False,
        np.zeros(3, dtype=np.int64), label_state(3, "proc"), replicas, 1.0,
        domain.index_of((0, 0, 0)), 0,
    )


def _walk_args(replicas):
    return (3, 400, replicas, label_state(4, "walks"), [400], False, False, 0)


CASES = [
    ("contact_sparse_batch", _sparse_args),
    ("contact_dense_batch", _dense_args),
    ("zeta_dense_batch", _zeta_args),
    ("walk_pair_batch", _walk_args),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--replicas", type=int, default=300)
    args = parser.parse_args()

    if _core is None:
        print("compiled backend unavailable; timing the python fallback only")
    print(f"{'kernel':<24} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name, make in CASES:
        kernel_args = make(args.replicas)
        t_py, ref = _time(getattr(py_core, name), *kernel_args)
        if _core is None:
            print(f"{name:<24} {t_py:>9.3f}s {'-':>10} {'-':>8}")
            continue
        t_c, got = _time(getattr(_core, name), *kernel_args)
        for a, b in zip(ref[:3], got[:3]):
            assert np.array_equal(np.asarray(a), np.asarray(b), equal_nan=True), name
        print(f"{name:<24} {t_py:>9.3f}s {t_c:>9.3f}s {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
