"""Optional numba acceleration for the hot numeric kernels.

Every kernel is written twice: a loop version that numba compiles, and a
vectorised numpy version. ``FROBPENCIL_JIT=0`` (or a missing numba) selects
the numpy versions at import time.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("FROBPENCIL_JIT", "1").strip().lower()
JIT_ENABLED = _FLAG not in {"0", "false", "no", "off"}

try:  # pragma: no cover - exercised implicitly
    import numba
except ImportError:  # pragma: no cover
    numba = None
    JIT_ENABLED = False


def jit(fn):
    """Compile ``fn`` with numba in nopython mode, or return it untouched."""
    if numba is None:
        return fn
    return numba.njit(cache=True, fastmath=False)(fn)


def select(loop_fn, numpy_fn):
    """Pick the compiled loop kernel or the numpy fallback per the env flag."""
    if JIT_ENABLED:
        return jit(loop_fn)
    return numpy_fn
