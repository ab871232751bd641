"""Kernel backend selection: compiled extension with numpy fallback.

The compiled core is used when importable; set ``SMOKESCAN_PURE=1`` to force
the numpy implementations (used by the parity tests and the benchmark).
"""

import os

from smokescan.kernels import fallback as _fallback

try:
    from smokescan.kernels import _core
except ImportError:  # extension not built
    _core = None

if _core is not None and not os.environ.get("SMOKESCAN_PURE"):
    _backend = _core
    BACKEND = "compiled"
else:
    _backend = _fallback
    BACKEND = "numpy"

HAVE_COMPILED = _core is not None

median_stack = _backend.median_stack
box_count = _backend.box_count
conv2d_bank = _backend.conv2d_bank
clahe_channel = _backend.clahe_channel

__all__ = [
    "BACKEND",
    "HAVE_COMPILED",
    "box_count",
    "clahe_channel",
    "conv2d_bank",
    "median_stack",
]
