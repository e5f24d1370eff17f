"""Selects the compiled kernels when available, else the numpy fallback.

Set ``PAIRLAB_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

try:
    if os.environ.get("PAIRLAB_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from . import _kernels as _impl
except ImportError:
    _impl = _pykernels

BACKEND = _impl.NAME

lag_histogram = _impl.lag_histogram
greedy_coincidences = _impl.greedy_coincidences
dead_time_mask = _impl.dead_time_mask


def available_backends():
    out = {"python": _pykernels}
    try:
        from . import _kernels
        out["cython"] = _kernels
    except ImportError:
        pass
    return out
