"""Backend selection for the dense Lindblad kernels.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``KICKED_QB_PURE_PYTHON`` is set to ``1``, the numpy
implementation is used. ``BACKEND`` names the active choice.
"""
import os

from . import _fallback

fallback = _fallback

if os.environ.get("KICKED_QB_PURE_PYTHON", "") == "1":
    compiled = None
else:
    try:
        from . import _lindblad as compiled
    except ImportError:  # extension not built
        compiled = None

active = compiled if compiled is not None else _fallback
BACKEND = "cython" if compiled is not None else "python"

lindblad_rhs = active.lindblad_rhs
rk4_steps = active.rk4_steps

__all__ = ["BACKEND", "lindblad_rhs", "rk4_steps", "compiled", "fallback"]
