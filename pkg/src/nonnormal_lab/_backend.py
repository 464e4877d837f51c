"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-Python
kernels are the fallback.  Set NONNORMAL_LAB_BACKEND=python|cython|auto to
force a choice (``cython`` raises if the extension is unavailable).
Both backends produce bit-identical results, so the selection never
changes experiment outputs, only their speed.
"""

import os

from . import _pykernels

_choice = os.environ.get("NONNORMAL_LAB_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "cython", "python"):
    raise RuntimeError(
        f"NONNORMAL_LAB_BACKEND must be auto, cython or python, got {_choice!r}"
    )

kernels = None
if _choice in ("auto", "cython"):
    try:
        from . import _fastkernels as kernels  # type: ignore[no-redef]
    except ImportError:
        if _choice == "cython":
            raise RuntimeError(
                "NONNORMAL_LAB_BACKEND=cython but the compiled extension "
                "nonnormal_lab._fastkernels is not importable"
            )
        kernels = None
if kernels is None:
    kernels = _pykernels

BACKEND = kernels.BACKEND_NAME
