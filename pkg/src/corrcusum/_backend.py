"""Selection between the numba-compiled kernels and the pure-numpy fallback.

Set ``CORRCUSUM_DISABLE_NUMBA=1`` before import to force the numpy path.
Numba being absent has the same effect.
"""

import os

__all__ = ["NUMBA_AVAILABLE", "USE_NUMBA", "njit"]

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def decorator(func):
            return func

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return decorator


def _flag(name):
    return os.environ.get(name, "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = NUMBA_AVAILABLE and not _flag("CORRCUSUM_DISABLE_NUMBA")
