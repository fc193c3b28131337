"""Kernel backend selection: compiled extension if available, numpy otherwise.

Set ``FEMDA_NUMPY_ONLY=1`` in the environment to force the pure-numpy path
(useful for benchmarking and for debugging the extension).
"""

import os

from . import _kernels_np

if os.environ.get("FEMDA_NUMPY_ONLY", "").strip() not in ("", "0"):
    kernels = _kernels_np
    HAVE_EXT = False
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        HAVE_EXT = True
    except ImportError:
        kernels = _kernels_np
        HAVE_EXT = False


def backend_name() -> str:
    return "compiled" if HAVE_EXT else "numpy"
