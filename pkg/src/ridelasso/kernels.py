"""Backend selection for the hot loops.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``RIDELASSO_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy implementation is used.
"""
import os

from . import _pykernels

_force_py = os.environ.get("RIDELASSO_PURE_PYTHON", "") not in ("", "0")

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

if _ckernels is not None and not _force_py:
    _impl = _ckernels
    BACKEND = "cython"
else:
    _impl = _pykernels
    BACKEND = "python"

haversine_matrix = _impl.haversine_matrix
network_iteration = _impl.network_iteration


def available_backends():
    """Mapping of backend name to kernel module, compiled first when present."""
    out = {}
    if _ckernels is not None:
        out["cython"] = _ckernels
    out["python"] = _pykernels
    return out
