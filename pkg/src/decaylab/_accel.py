"""Backend selection for the hot kernels.

Set ``DECAYLAB_BACKEND=numpy`` to force the pure-numpy code path even when
numba is importable. Any other value (or unset) uses numba if available.
"""
from __future__ import annotations

import os

_requested = os.environ.get("DECAYLAB_BACKEND", "numba").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - depends on environment
    _numba = None

USE_NUMBA = _numba is not None and _requested != "numpy"
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(func):
    """``numba.njit(cache=True)`` when numba is active, identity otherwise."""
    if _numba is None:
        return func
    return _numba.njit(cache=True)(func)
