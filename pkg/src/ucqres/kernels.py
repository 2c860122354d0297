"""Backend selection for the search kernels.

The compiled extension is used when it imports; set ``UCQRES_PURE=1`` to
force the pure-Python fallback.
"""

import os

from . import _fallback

if os.environ.get("UCQRES_PURE") == "1":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

hom_search_binary = _impl.hom_search_binary
min_hitting_deletion = _impl.min_hitting_deletion

__all__ = ["BACKEND", "hom_search_binary", "min_hitting_deletion"]
