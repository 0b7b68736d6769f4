"""Kernel backend selection: JIT-compiled by default, pure NumPy as fallback.

Set ``TRIPODSIM_BACKEND=numpy`` to force the reference implementation (useful
for debugging and on machines without a working numba); ``numba`` forces the
compiled kernels and raises if numba is unavailable.  ``benchmarks/`` contains
a script comparing the two.
"""

from __future__ import annotations

import os
import warnings

BACKEND_ENV = "TRIPODSIM_BACKEND"
_VALID = ("numba", "numpy")


def default_backend_name() -> str:
    name = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if name not in _VALID:
        raise ValueError(f"{BACKEND_ENV} must be one of {_VALID}, got {name!r}")
    return name


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (default: environment selection)."""
    explicit = name is not None
    name = name or default_backend_name()
    if name == "numpy":
        from . import _kernels_numpy

        return _kernels_numpy
    try:
        from . import _kernels_numba

        return _kernels_numba
    except ImportError as exc:
        if explicit:
            raise
        warnings.warn(
            f"numba backend unavailable ({exc}); falling back to numpy kernels",
            RuntimeWarning,
            stacklevel=2,
        )
        from . import _kernels_numpy

        return _kernels_numpy


def active_backend_name() -> str:
    return get_backend().NAME
