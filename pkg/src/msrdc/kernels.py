"""Scan-backend selection.

The hot per-key candidate scans exist twice: a compiled Cython extension
(_scan) and a pure-Python twin (_scan_py) with identical semantics.  The
compiled one is used whenever it is importable and the data fits its fixed
dtypes (client masks in 64 bits, costs in int64/float64); set
MSRDC_PURE_PYTHON=1 to force the fallback, e.g. for benchmarking both.
"""

from __future__ import annotations

import os

from . import _scan_py

try:
    from . import _scan

    HAVE_COMPILED = True
except ImportError:  # extension not built; stay on the fallback
    _scan = None
    HAVE_COMPILED = False

_force_pure = os.environ.get("MSRDC_PURE_PYTHON", "") not in ("", "0")


def force_pure(flag: bool) -> None:
    global _force_pure
    _force_pure = bool(flag)


def select(mask_dtype, cost_dtype):
    """Backend module for the given table dtypes."""
    if _force_pure or not HAVE_COMPILED:
        return _scan_py
    if mask_dtype is object or cost_dtype is object:
        return _scan_py
    return _scan


def backend_name() -> str:
    return "pure" if (_force_pure or not HAVE_COMPILED) else "compiled"
