"""Selects the traversal backend at import time.

The compiled extension is preferred; set ``RULELP_PURE_PYTHON=1`` to force
the pure-Python twin (useful for debugging and for the backend benchmark).
"""

from __future__ import annotations

import os

from . import _pathcore_py

if os.environ.get("RULELP_PURE_PYTHON"):
    kernels = _pathcore_py
else:
    try:
        from . import _pathcore as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _pathcore_py

BACKEND: str = "compiled" if kernels is not _pathcore_py else "pure-python"

NO_EDGE = _pathcore_py.NO_EDGE
