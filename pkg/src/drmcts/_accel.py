"""Numba toggle.

Set ``DRMCTS_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g. when
debugging or on platforms without a numba wheel.
"""
import os

_DISABLED = os.environ.get("DRMCTS_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(func):
    """``numba.njit(cache=True)`` when numba is installed, identity otherwise."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True)(func)
