"""Hot-loop dispatch: the compiled extension when built, numpy otherwise.

Set ``MLGSP_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _fallback

fallback = _fallback

if os.environ.get("MLGSP_PURE_PYTHON", "") not in ("", "0"):
    compiled = None
else:
    try:
        from . import _core as compiled
    except ImportError:
        compiled = None

_impl = compiled if compiled is not None else _fallback
BACKEND = "cython" if compiled is not None else "python"

window_correlate = _impl.window_correlate
slic_assign = _impl.slic_assign
