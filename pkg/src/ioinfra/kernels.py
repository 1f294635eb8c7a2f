"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``IOINFRA_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("IOINFRA_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = _impl.BACKEND
ras_sweeps = _impl.ras_sweeps
varimax_sweeps = _impl.varimax_sweeps
varimax_criterion = _impl.varimax_criterion


def available_backends():
    """Return ``{name: module}`` for every importable backend."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out
