"""Selects the compiled kernel extension, falling back to pure numpy.

Set SWFCT_FORCE_PYTHON=1 to skip the extension (used by the backend
comparison tests and the benchmark script).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("SWFCT_FORCE_PYTHON", "").strip() not in ("", "0"):
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py


def backend_name() -> str:
    return kernels.BACKEND_NAME


def python_kernels():
    """The pure-python kernel module (always available)."""
    return _kernels_py
