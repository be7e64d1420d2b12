"""Select the compiled kernels when available, else the numpy fallback.

Set ``NBLDPC_PURE_PYTHON=1`` to force the fallback (used by the backend
equivalence tests and the benchmark).
"""

from __future__ import annotations

import logging
import os

log = logging.getLogger(__name__)

if os.environ.get("NBLDPC_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels

        BACKEND = "cython"
    except ImportError:  # extension not built
        log.info("compiled kernels unavailable, using numpy fallback")
        from . import _pykernels as kernels

        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
