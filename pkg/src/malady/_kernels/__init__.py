"""Hot loops: compiled extension when built, pure Python otherwise.

Set ``MALADY_PURE_PYTHON=1`` to force the fallback.  ``BACKEND`` names
the active implementation; ``get_backend`` returns either one explicitly
(used by the cross-backend tests and the benchmark).
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

if _ckernels is not None and not os.environ.get("MALADY_PURE_PYTHON"):
    _active = _ckernels
    BACKEND = "cython"
else:
    _active = _pykernels
    BACKEND = "python"

membership_auction = _active.membership_auction
upper_bound_auction = _active.upper_bound_auction
lower_bound_pass = _active.lower_bound_pass
outside_sums = _active.outside_sums
cut_weight = _active.cut_weight


def get_backend(name):
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    return ["python"] + (["cython"] if _ckernels is not None else [])
