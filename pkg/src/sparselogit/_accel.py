"""Numba switch for the hot kernels.

Set ``SPARSELOGIT_DISABLE_NUMBA=1`` to run every kernel as plain numpy/Python.
The flag is read once, at import time.
"""

from __future__ import annotations

import os

_FALSY = {"", "0", "false", "no", "off"}

DISABLED_BY_ENV = os.environ.get("SPARSELOGIT_DISABLE_NUMBA", "").strip().lower() not in _FALSY

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and not DISABLED_BY_ENV


def jit(fn):
    """Compile ``fn`` in nopython mode when numba is active, else return it unchanged."""
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
