"""JIT switch for the numeric kernels.

Set ``NUDGESIM_DISABLE_JIT=1`` before import to run every kernel as plain
numpy/Python. The flag is read once; tests and the benchmark compare both
paths by spawning fresh interpreters.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}

JIT_DISABLED = os.environ.get("NUDGESIM_DISABLE_JIT", "").strip().lower() not in _FALSY

try:
    from numba import njit as _njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay importable
    _njit = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and not JIT_DISABLED


def maybe_njit(func=None, **options):
    """``numba.njit`` when JIT is enabled, identity otherwise."""

    def wrap(f):
        if USE_NUMBA:
            options.setdefault("cache", True)
            return _njit(**options)(f)
        return f

    if func is None:
        return wrap
    return wrap(func)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
