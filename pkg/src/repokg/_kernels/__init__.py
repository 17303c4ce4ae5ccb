"""Hot numeric kernels with a compiled core and a pure-Python fallback.

The compiled Cython module is selected at import when present; setting
``REPOKG_PURE_PYTHON=1`` forces the fallback (used by the benchmark to compare
backends). Both implementations perform the same operations in the same order,
so results are identical for integer work and match to float64 rounding for
scores.
"""

import os

if os.environ.get("REPOKG_PURE_PYTHON"):
    from . import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # compiled extension

        BACKEND = "c"
    except ImportError:
        from . import _pykernels as _impl

        BACKEND = "python"

dot_scores = _impl.dot_scores
bfs_reachable = _impl.bfs_reachable
louvain_move_pass = _impl.louvain_move_pass
labelprop_sweep = _impl.labelprop_sweep

__all__ = [
    "BACKEND",
    "dot_scores",
    "bfs_reachable",
    "louvain_move_pass",
    "labelprop_sweep",
]
