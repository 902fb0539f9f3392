"""Optional numba acceleration.

Set ``MHPNET_DISABLE_NUMBA=1`` (or run without numba installed) to use the
pure numpy/scipy kernels. Both paths produce the same results for the same
inputs; the choice only affects speed.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional
    numba = None

HAVE_NUMBA = numba is not None
NUMBA_DISABLED = os.environ.get("MHPNET_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")
USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED


def njit(*args, **kwargs):
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)
