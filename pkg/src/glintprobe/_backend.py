"""Kernel backend selection.

The compiled extension is preferred when importable; set
GLINTPROBE_KERNELS=python (or =compiled) to force a backend.  Selection
happens once at import.
"""

from __future__ import annotations

import os

from . import _kernels_py

_requested = os.environ.get("GLINTPROBE_KERNELS", "auto").lower()

if _requested not in ("auto", "python", "compiled"):
    raise RuntimeError(f"GLINTPROBE_KERNELS must be auto|python|compiled, got {_requested!r}")

if _requested == "python":
    kernels = _kernels_py
    KERNEL_BACKEND = "python"
else:
    try:
        from . import _kernels_cy as kernels  # type: ignore[no-redef]

        KERNEL_BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        kernels = _kernels_py
        KERNEL_BACKEND = "python"


def kernel_backend() -> str:
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return KERNEL_BACKEND
