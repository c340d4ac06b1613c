"""Select compiled kernels when available, else the numpy fallback.

Set ``SUPERRADIANCE_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("SUPERRADIANCE_PURE_PYTHON") == "1":
    from . import _kernels_py as kernels
    COMPILED = False
else:
    try:
        from . import _kernels as kernels
        COMPILED = True
    except ImportError:
        from . import _kernels_py as kernels
        COMPILED = False

__all__ = ["kernels", "COMPILED"]
