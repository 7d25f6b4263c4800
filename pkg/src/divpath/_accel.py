"""Backend selection for the compiled kernels.

Set ``DIVPATH_DISABLE_NUMBA=1`` before import to force the pure-numpy path.
"""
import os

_FALSY = ("", "0", "false", "no", "off")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

DISABLED = os.environ.get("DIVPATH_DISABLE_NUMBA", "0").strip().lower() not in _FALSY
USE_NUMBA = numba is not None and not DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit_opts():
    return dict(cache=True, nogil=True, fastmath=False, error_model="numpy")


def njit(func):
    """Compile ``func`` with numba when it is available, else return it as is.

    Kernels decorated here are always written so they also run as plain
    Python; the numpy fallbacks in :mod:`divpath.kernels` are the fast path
    when numba is off.
    """
    if numba is None:
        return func
    return numba.njit(**njit_opts())(func)
