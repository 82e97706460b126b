"""Kernel backend selection.

The compiled extension is used when available; the pure-python kernels are
a drop-in replacement producing bit-identical trajectories (same streams,
same draw order).  Set OPCONTACT_FORCE_PYTHON=1 to force the fallback.
"""

import os

from . import py_core
from .domains import DenseDomain, backward_cone, box, cone_depth_for_series_tail

if os.environ.get("OPCONTACT_FORCE_PYTHON"):
    _impl = py_core
    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = py_core
        BACKEND = "python"

contact_sparse_batch = _impl.contact_sparse_batch
contact_dense_batch = _impl.contact_dense_batch
zeta_dense_batch = _impl.zeta_dense_batch
walk_pair_batch = _impl.walk_pair_batch

# reference-only entry points (single detailed runs, couplings, joint checks)
contact_sparse_run = py_core.contact_sparse_run
coupled_pair_run = py_core.coupled_pair_run
zeta_dense_run = py_core.zeta_dense_run

__all__ = [
    "BACKEND",
    "DenseDomain",
    "backward_cone",
    "box",
    "cone_depth_for_series_tail",
    "contact_sparse_batch",
    "contact_dense_batch",
    "zeta_dense_batch",
    "walk_pair_batch",
    "contact_sparse_run",
    "coupled_pair_run",
    "zeta_dense_run",
    "py_core",
]
