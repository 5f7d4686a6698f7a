"""Backend selection for the per-step kernels.

The compiled ``_ckernels`` extension is used when it imports; setting the
environment variable ``KGEWI_PURE_PYTHON=1`` forces the NumPy fallback.
"""
import os

if os.environ.get("KGEWI_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        from . import _pykernels as _impl

BACKEND = _impl.BACKEND
chain_term = _impl.chain_term
accel = _impl.accel
main_update = _impl.main_update

__all__ = ["BACKEND", "chain_term", "accel", "main_update"]
