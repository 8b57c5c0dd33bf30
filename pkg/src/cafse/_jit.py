"""Numba toggle.

Set ``CAFSE_NO_NUMBA=1`` to force the pure-numpy kernels even when numba is
installed. The choice is made once, at import time.
"""

import os

_DISABLED = os.environ.get("CAFSE_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(fn):
    """Compile ``fn`` with numba when available, else return it unchanged."""
    if not HAVE_NUMBA:
        return fn
    return _njit(cache=True, nogil=True)(fn)
