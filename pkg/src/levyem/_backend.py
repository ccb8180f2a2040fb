"""Kernel backend selection.

The compiled core is used when it imports; setting ``LEVYEM_PURE=1`` forces the
numpy fallback.
"""

import os

from . import _fallback

if os.environ.get("LEVYEM_PURE", "") not in ("", "0"):
    kernels = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as kernels
        BACKEND = "compiled"
    except ImportError:  # extension not built
        kernels = _fallback
        BACKEND = "python"

fallback = _fallback
