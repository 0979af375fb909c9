"""Integer kernels with a compiled backend and a pure-Python fallback.

The compiled module is used when it was built and ``KMLAB_PURE_PYTHON`` is
not set; ``BACKEND`` records which one was selected.
"""

import os

from . import _fallback

fallback = _fallback

if os.environ.get("KMLAB_PURE_PYTHON"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

inversion_parity = _impl.inversion_parity
box_norm_counts = _impl.box_norm_counts
box_enumerate = _impl.box_enumerate


def compiled():
    """The compiled module, or None when it is unavailable."""
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels


__all__ = ["BACKEND", "inversion_parity", "box_norm_counts", "box_enumerate",
           "fallback", "compiled"]
