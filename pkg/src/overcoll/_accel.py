"""Optional numba acceleration.

Set ``OVERCOLL_DISABLE_NUMBA=1`` to force the pure numpy code paths, e.g. to
compare results or when numba is not installed.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

_FALSY = {"", "0", "false", "no", "off"}


def numba_disabled():
    return os.environ.get("OVERCOLL_DISABLE_NUMBA", "").strip().lower() not in _FALSY


HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not numba_disabled()


def try_njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise return the function unchanged."""
    kwargs.setdefault("cache", True)

    def wrap(fn):
        if not HAVE_NUMBA:
            return fn
        return numba.njit(**kwargs)(fn)

    if len(args) == 1 and callable(args[0]):
        return wrap(args[0])
    return wrap
