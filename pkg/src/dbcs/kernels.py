"""Backend selection for the sequential simulation kernels.

The compiled extension ``dbcs._kernels`` is used when it was built and
``DBCS_PURE_PYTHON`` is unset or ``0``; otherwise the pure-Python reference in
``dbcs._kernels_py`` is used.  Both produce bit-identical results.
"""
import os

from . import _kernels_py

UNIFORM = _kernels_py.UNIFORM
MEAN_PROPORTIONAL = _kernels_py.MEAN_PROPORTIONAL

_FUNCS = ("compensated_cumsum", "policy_path", "ar1_filter", "ls_predictions")


def _load_compiled():
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


def _want_pure():
    return os.environ.get("DBCS_PURE_PYTHON", "0") not in ("", "0")


_compiled = None if _want_pure() else _load_compiled()
BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py

compensated_cumsum = _impl.compensated_cumsum
policy_path = _impl.policy_path
ar1_filter = _impl.ar1_filter
ls_predictions = _impl.ls_predictions


def backends():
    """Map of available backend name to module, for comparisons and benchmarks."""
    out = {"python": _kernels_py}
    compiled = _load_compiled()
    if compiled is not None:
        out["cython"] = compiled
    return out
