"""Backend switch for the compiled kernels.

Set ``TRIMOT_DISABLE_NUMBA=1`` in the environment before importing
:mod:`trimot` to run every hot kernel through its pure-numpy twin.
"""

import os

_FLAG = "TRIMOT_DISABLE_NUMBA"


def _numba_requested():
    return os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _numba = None

NUMBA_AVAILABLE = _numba is not None
USE_NUMBA = NUMBA_AVAILABLE and _numba_requested()


def njit(func=None, **kwargs):
    """``numba.njit(cache=True, nogil=True)``, or identity when numba is absent."""
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    if _numba is None:
        return func if func is not None else (lambda f: f)
    if func is None:
        return _numba.njit(**kwargs)
    return _numba.njit(**kwargs)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
