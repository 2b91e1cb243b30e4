"""JIT switch for the numeric kernels.

Kernels are written once in a numba-compatible subset of numpy and decorated
with :func:`njit`. Setting ``CYBORGNAV_DISABLE_NUMBA=1`` (or running without
numba installed) leaves them as plain Python functions, which is slower but
produces the same numbers.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

__all__ = ["njit", "NUMBA_ENABLED"]

NUMBA_ENABLED = numba is not None and os.environ.get(
    "CYBORGNAV_DISABLE_NUMBA", ""
).strip().lower() not in ("1", "true", "yes")


def njit(f=None, **options):
    options.setdefault("cache", True)
    if not NUMBA_ENABLED:
        if f is None:
            return lambda g: g
        return f
    if f is None:
        return lambda g: numba.njit(g, **options)
    return numba.njit(f, **options)
