"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly, unless the environment
variable ``TMK_DISABLE_NUMBA`` is set to a truthy value (``1``, ``true``,
``yes``).  Both paths share signatures, so :func:`get_backend` can hand out
either one explicitly for cross-checks and benchmarks.
"""

import os
from types import ModuleType

from . import _kernels_np

_NAMES = (
    "cell_indices",
    "cell_histogram",
    "corner_differences",
    "opnorms",
    "opnorm_sum",
    "smooth_step",
    "trbdf2",
)


def _numba_disabled():
    return os.environ.get("TMK_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")


def get_backend(name: str) -> ModuleType:
    """Return the kernel module for ``"numba"`` or ``"numpy"``."""
    if name == "numpy":
        return _kernels_np
    if name == "numba":
        from . import _kernels_nb
        return _kernels_nb
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    if _numba_disabled():
        return "numpy", _kernels_np
    try:
        return "numba", get_backend("numba")
    except ImportError:
        return "numpy", _kernels_np


BACKEND, _impl = _select()

cell_indices = _impl.cell_indices
cell_histogram = _impl.cell_histogram
corner_differences = _impl.corner_differences
opnorms = _impl.opnorms
opnorm_sum = _impl.opnorm_sum
smooth_step = _impl.smooth_step
trbdf2 = _impl.trbdf2

__all__ = ["BACKEND", "get_backend", *_NAMES]
