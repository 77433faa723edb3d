"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; setting
``SCREENCLUST_PURE=1`` forces the numpy fallback (useful for benchmarking
and for debugging kernel discrepancies).
"""

import os

from . import _kernels_py

if os.environ.get("SCREENCLUST_PURE") == "1":
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py

HAS_COMPILED = kernels.IMPL == "cython"

cell_histograms = kernels.cell_histograms
assign_nearest = kernels.assign_nearest
best_split = kernels.best_split
