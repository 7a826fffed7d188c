"""Runtime switches read from the environment.

``HYPQUOT_NO_NUMBA=1`` forces the pure numpy kernels even when numba is
importable.  ``HYPQUOT_THREADS`` sets the default worker count for sweeps.
"""
import os

DIST_TABLE_THRESHOLD = 5000
DELTA_EXACT_CAP = 400
VERTEX_CAP = 1_000_000
FLUSH = 1e-12


def _truthy(value):
    return value.strip().lower() in ("1", "true", "yes", "on")


def use_numba():
    if _truthy(os.environ.get("HYPQUOT_NO_NUMBA", "0")):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def default_workers():
    try:
        return max(1, int(os.environ.get("HYPQUOT_THREADS", "1")))
    except ValueError:
        return 1
