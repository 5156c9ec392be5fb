"""Dense kernels with a compiled backend and a numpy fallback.

The Cython extension ``fracdiff._kernels`` is used when it was built at
install time; otherwise the numpy versions in :mod:`fracdiff._fallback` are
selected.  :func:`use_backend` switches explicitly (tests and benchmarks).
"""

from __future__ import annotations

import numpy as np

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

HAVE_COMPILED = _compiled is not None
BACKEND = "compiled" if HAVE_COMPILED else "python"
_impl = _compiled if HAVE_COMPILED else _fallback


def use_backend(name: str) -> str:
    """Select ``"compiled"`` or ``"python"``; returns the previous backend name."""
    global BACKEND, _impl
    previous = BACKEND
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernels are not available in this install")
        _impl = _compiled
    elif name == "python":
        _impl = _fallback
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name
    return previous


def jacobi_eigvalsh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 50):
    work = np.array(a, dtype=np.float64, order="C", copy=True)
    return _impl.jacobi_eigvalsh(work, tol, max_sweeps)


def cholesky(a: np.ndarray) -> np.ndarray:
    return _impl.cholesky(np.ascontiguousarray(a, dtype=np.float64))


def cho_solve(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _impl.cho_solve(
        np.ascontiguousarray(L, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64),
    )
