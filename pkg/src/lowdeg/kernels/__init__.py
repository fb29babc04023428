"""Hot-loop kernels with a compiled core and a numpy fallback.

The compiled extension is used when it imports and ``LOWDEG_PURE_PYTHON``
is unset (or "0").  ``BACKEND`` names the active implementation; both stay
importable as ``compiled`` (possibly ``None``) and ``fallback`` so they can
be compared directly.
"""
from __future__ import annotations

import os

from . import _pykernels as fallback

try:
    from . import _ckernels as compiled
except ImportError:  # extension not built
    compiled = None

if compiled is not None and os.environ.get("LOWDEG_PURE_PYTHON", "0") in ("", "0"):
    _active = compiled
    BACKEND = "compiled"
else:
    _active = fallback
    BACKEND = "numpy"

fwht = _active.fwht
spectrum_bits = _active.spectrum_bits
spectrum_real = _active.spectrum_real

__all__ = ["BACKEND", "compiled", "fallback", "fwht", "spectrum_bits", "spectrum_real"]
