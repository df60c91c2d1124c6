"""Kernel compilation switch.

Hot kernels are decorated with :func:`jit`. When numba is importable and the
environment variable ``URLLC_ALLOC_NO_JIT`` is unset (or ``0``), they are
compiled with ``numba.njit``; otherwise the very same functions run as plain
Python/NumPy code. The flag is read once, at import time.
"""

import os

_flag = os.environ.get("URLLC_ALLOC_NO_JIT", "").strip().lower()
DISABLED = _flag not in ("", "0", "false", "no")

try:
    if DISABLED:
        raise ImportError
    import numba

    USING_NUMBA = True
except ImportError:
    numba = None
    USING_NUMBA = False


def jit(fn):
    if USING_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn
