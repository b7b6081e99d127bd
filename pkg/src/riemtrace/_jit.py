"""Kernel compilation switch.

Hot kernels are plain Python functions over floats, tuples and numpy
arrays.  When numba is importable and ``RIEMTRACE_DISABLE_JIT`` is unset
(or ``0``), they are compiled with ``numba.njit``; otherwise the very same
functions run in the interpreter.  The flag is read once, at import time.
"""

import os

_FLAG = os.environ.get("RIEMTRACE_DISABLE_JIT", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

JIT_ENABLED = numba is not None and not _DISABLED


def jit(fn=None, **options):
    """``numba.njit(cache=True, nogil=True)`` or the identity decorator."""
    if fn is None:
        return lambda f: jit(f, **options)
    if not JIT_ENABLED:
        return fn
    options.setdefault("cache", True)
    options.setdefault("nogil", True)
    return numba.njit(**options)(fn)
