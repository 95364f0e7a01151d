"""Inner-loop kernel selection.

The compiled extension is preferred when importable; set GPID_PURE_PYTHON=1
to force the numpy reference, or pick per call via SolverConfig.kernel.
"""
from __future__ import annotations

import os

from . import _loop_py
from .errors import ValidationError

if os.environ.get("GPID_PURE_PYTHON", "") == "1":
    _COMPILED = None
else:
    try:
        from . import _loop as _compiled_mod
    except ImportError:
        _COMPILED = None
    else:
        _COMPILED = _compiled_mod.run_loop

HAVE_COMPILED = _COMPILED is not None
DEFAULT_KERNEL = "compiled" if HAVE_COMPILED else "python"


def resolve_kernel(name: str):
    """Map a kernel name to its run_loop callable."""
    if name == "auto":
        return _COMPILED if HAVE_COMPILED else _loop_py.run_loop
    if name == "python":
        return _loop_py.run_loop
    if name == "compiled":
        if not HAVE_COMPILED:
            raise ValidationError("compiled kernel requested but not available")
        return _COMPILED
    raise ValidationError(f"unknown kernel {name!r}")
