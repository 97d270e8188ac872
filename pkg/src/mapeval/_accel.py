"""Optional numba acceleration.

Hot kernels are written once as plain loops and decorated with :func:`njit`.
When numba is unavailable, or ``MAPEVAL_DISABLE_NUMBA`` is set to a truthy
value, the decorator is a no-op and callers dispatch to the vectorised numpy
implementations instead (see ``mapeval.imgproc._kernels``).
"""
from __future__ import annotations

import os

_FALSY = ("", "0", "false", "no", "off")


def _numba_requested() -> bool:
    return os.environ.get("MAPEVAL_DISABLE_NUMBA", "").strip().lower() in _FALSY


_numba = None
if _numba_requested():
    try:
        import numba as _numba
    except ImportError:  # pragma: no cover - depends on environment
        _numba = None

HAVE_NUMBA = _numba is not None
# Module-level switch read at call time, so tests can flip it.
USE_NUMBA = HAVE_NUMBA


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` if available, otherwise the identity decorator."""
    if _numba is not None:
        kwargs.setdefault("cache", True)
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
