"""Backend selection for the hot numeric kernels.

Set ``ACSIDM_DISABLE_NUMBA=1`` before import to run every kernel through its
pure-numpy fallback. If numba cannot be imported the fallback is used as well.
"""

import os

_DISABLED = os.environ.get("ACSIDM_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError("numba disabled by ACSIDM_DISABLE_NUMBA")
    import numba as _numba
except ImportError:
    _numba = None

NUMBA_AVAILABLE = _numba is not None
USE_NUMBA = NUMBA_AVAILABLE


def njit(*args, **kwargs):
    """``numba.njit`` when numba is available, otherwise an identity decorator.

    The undecorated function is kept on ``.py_func`` in both cases so callers
    can reach the interpreted version.
    """
    if _numba is not None:
        return _numba.njit(*args, **kwargs)

    def wrap(fn):
        fn.py_func = fn
        return fn

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return wrap(args[0])
    return wrap


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
