"""Hot numeric kernels with a numba path and a numpy fallback.

The backend is chosen once at import time from ``HYPQUOT_NO_NUMBA``; both
implementations stay importable as ``kernels.numba_impl`` / ``kernels.numpy_impl``
so tests and the benchmark can compare them directly.
"""
from .. import _config
from . import _numpy as numpy_impl

if _config.use_numba():
    from . import _numba as numba_impl
    BACKEND = "numba"
    _active = numba_impl
else:
    numba_impl = None
    BACKEND = "numpy"
    _active = numpy_impl

bfs_row = _active.bfs_row
all_pairs = _active.all_pairs
four_point = _active.four_point
nesting_scan = _active.nesting_scan
minplus_closure = _active.minplus_closure
set_distance = _active.set_distance

__all__ = [
    "BACKEND", "numba_impl", "numpy_impl", "bfs_row", "all_pairs", "four_point",
    "nesting_scan", "minplus_closure", "set_distance",
]
