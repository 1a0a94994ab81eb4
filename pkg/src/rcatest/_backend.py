"""Kernel selection.

The compiled extension is used when it imports; otherwise, or when the
``RCATEST_PURE_PYTHON`` environment variable is set to a non-empty value
other than ``0``, the pure-Python kernels are used.  ``BACKEND`` names the
active choice.
"""
import os

from . import _pykernels

_force_python = os.environ.get("RCATEST_PURE_PYTHON", "") not in ("", "0")

if _force_python:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

rcar_path = _impl.rcar_path
threshold_counts = _impl.threshold_counts

__all__ = ["BACKEND", "rcar_path", "threshold_counts"]
