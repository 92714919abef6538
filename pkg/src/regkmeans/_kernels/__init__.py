"""Kernel backend selection.

The compiled extension is used when importable; setting
``REGKMEANS_PURE_PYTHON=1`` forces the NumPy fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("REGKMEANS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

best_subset_1means = _impl.best_subset_1means
best_labeling = _impl.best_labeling
project_row_cone = _impl.project_row_cone

__all__ = ["BACKEND", "best_subset_1means", "best_labeling", "project_row_cone"]
