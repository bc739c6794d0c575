"""Hot kernels: VA visibility ray tests and rectangular linear assignment.

The compiled Cython module is used when it was built; otherwise, or when the
environment variable ``MINTLOC_PURE_PYTHON`` is set to a non-empty value, the
numpy / pure-Python reference implementation is selected at import time.
"""
from __future__ import annotations

import os

from . import _pure

BACKEND = "python"
visible_mask = _pure.visible_mask
linear_assignment = _pure.linear_assignment

if not os.environ.get("MINTLOC_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        _ckernels = None
    if _ckernels is not None:
        BACKEND = "cython"
        visible_mask = _ckernels.visible_mask
        linear_assignment = _ckernels.linear_assignment


def backends():
    """Return ``{name: module}`` for every kernel backend available here."""
    found = {"python": _pure}
    try:
        from . import _ckernels as ck
    except ImportError:
        return found
    found["cython"] = ck
    return found


__all__ = ["BACKEND", "backends", "linear_assignment", "visible_mask"]
