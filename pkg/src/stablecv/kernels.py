"""Hot loops, dispatched at import to the compiled or pure-Python backend.

``STABLECV_PURE_PYTHON=1`` forces the fallback even when the extension is
built.  ``BACKEND`` names the active implementation.
"""
import os

if os.environ.get("STABLECV_PURE_PYTHON"):
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        from . import _pykernels as _impl

BACKEND = _impl.BACKEND
draw_indices = _impl.draw_indices
cholesky = _impl.cholesky
cho_solve = _impl.cho_solve
sgd_quadratic = _impl.sgd_quadratic
pegasos = _impl.pegasos
sgd_counterexample = _impl.sgd_counterexample

__all__ = [
    "BACKEND",
    "draw_indices",
    "cholesky",
    "cho_solve",
    "sgd_quadratic",
    "pegasos",
    "sgd_counterexample",
]
