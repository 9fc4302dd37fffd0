"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy implementations in ``_pykernels``. Setting ``RSS_INFER_PURE=1`` forces
the numpy path (used by the benchmark and the backend-agreement tests).
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels


def _load() -> tuple[ModuleType, str]:
    if os.environ.get("RSS_INFER_PURE", "") not in ("", "0"):
        return _pykernels, "python"
    try:
        from . import _ckernels
    except ImportError:
        return _pykernels, "python"
    return _ckernels, "cython"


kernels, BACKEND = _load()

__all__ = ["BACKEND", "kernels"]
