"""Select the compiled kernels when available.

Set ``LMM_PURE_PYTHON=1`` to force the pure-Python implementation.
"""

import os

if os.environ.get("LMM_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as kernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels
        BACKEND = "python"

from . import _kernels_py as reference_kernels  # noqa: E402

__all__ = ["kernels", "reference_kernels", "BACKEND"]
