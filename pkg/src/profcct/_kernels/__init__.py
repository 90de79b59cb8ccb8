"""Tree kernels with a compiled fast path.

The Cython extension is preferred when it was built; set PROFCCT_PURE=1
to force the pure-Python fallback. ``benchmarks/bench_kernels.py``
compares the two backends on synthetic trees.
"""

import os

from . import _pure

BACKEND = "pure"
_impl = _pure
if os.environ.get("PROFCCT_PURE", "0") in ("", "0"):
    try:
        from . import _ext as _impl  # type: ignore[no-redef]
        BACKEND = "ext"
    except ImportError:
        pass

accumulate_down = _impl.accumulate_down
node_depths = _impl.node_depths
topmost_flags = _impl.topmost_flags
bottom_up_merge = _impl.bottom_up_merge
collapse_merge = _impl.collapse_merge


def backend() -> str:
    """Name of the active kernel backend ("ext" or "pure")."""
    return BACKEND
