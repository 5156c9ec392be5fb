"""Conjugate gradients with optional preconditioning, and dense spectra."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import kernels

DEFAULT_TOL = 1e-12
# above this size the cyclic Jacobi sweep is replaced by LAPACK
JACOBI_MAX_SIZE = 512

LinearOperator = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


class BreakdownError(ArithmeticError):
    """``p^T A p <= 0`` during CG: the operator is not positive definite."""


@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    final_relative_residual: float
    converged: bool


def _as_matvec(A: LinearOperator) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(A, np.ndarray):
        return lambda v: A @ v
    if hasattr(A, "matvec"):
        return A.matvec
    return A


def _as_solve(P) -> Callable[[np.ndarray], np.ndarray]:
    if P is None:
        return lambda r: r
    if hasattr(P, "solve"):
        return P.solve
    return P


def pcg(
    A: LinearOperator,
    P,
    b: np.ndarray,
    tol: float = DEFAULT_TOL,
    maxit: int | None = None,
    callback: Callable[[np.ndarray], None] | None = None,
) -> SolveReport:
    """Preconditioned CG from a zero initial guess.

    Stops when ``||r_k|| / ||r_0|| < tol`` for the unpreconditioned residual.
    ``P`` is anything with a ``solve`` method, a callable applying ``P^{-1}``,
    or ``None`` for plain CG.  One iteration is one product with ``A``;
    ``callback`` receives the iterate after each one.
    """
    matvec = _as_matvec(A)
    psolve = _as_solve(P)
    b = np.asarray(b, dtype=np.float64)
    n = b.size
    if maxit is None:
        maxit = 10 * n

    x = np.zeros(n)
    r = b.copy()
    r0 = float(np.linalg.norm(r))
    if r0 == 0.0:
        return SolveReport(x, 0, 0.0, True)

    z = psolve(r)
    p = z.copy()
    rz = float(r @ z)
    relres = 1.0
    it = 0
    while it < maxit:
        Ap = matvec(p)
        it += 1
        pAp = float(p @ Ap)
        if not pAp > 0.0:
            raise BreakdownError(f"p^T A p = {pAp:.3e} at iteration {it}")
        step = rz / pAp
        x += step * p
        r -= step * Ap
        if callback is not None:
            callback(x)
        relres = float(np.linalg.norm(r)) / r0
        if relres < tol:
            return SolveReport(x, it, relres, True)
        z = psolve(r)
        rz_new = float(r @ z)
        p *= rz_new / rz
        p += z
        rz = rz_new
    return SolveReport(x, it, relres, False)


def cg(
    A: LinearOperator,
    b: np.ndarray,
    tol: float = DEFAULT_TOL,
    maxit: int | None = None,
    callback: Callable[[np.ndarray], None] | None = None,
) -> SolveReport:
    return pcg(A, None, b, tol=tol, maxit=maxit, callback=callback)


def spectrum(A: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Sorted eigenvalues of a dense symmetric matrix.

    Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls
    below ``tol`` times the matrix norm.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("spectrum needs a square matrix")
    if A.shape[0] > JACOBI_MAX_SIZE:
        return np.linalg.eigvalsh(0.5 * (A + A.T))
    values, _ = kernels.jacobi_eigvalsh(A, tol=tol)
    return np.sort(values)


def precond_spectrum(A: np.ndarray, P: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Eigenvalues of ``P^{-1} A`` via the similar matrix ``L^{-1} A L^{-T}``, ``P = L L^T``."""
    A = np.asarray(A, dtype=np.float64)
    P = np.asarray(P, dtype=np.float64)
    if A.shape != P.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {P.shape}")
    L = kernels.cholesky(P)
    Linv = _lower_inverse(L)
    S = Linv @ A @ Linv.T
    return spectrum(0.5 * (S + S.T), tol=tol)


def _lower_inverse(L: np.ndarray) -> np.ndarray:
    n = L.shape[0]
    inv = np.zeros_like(L)
    eye = np.eye(n)
    # forward substitution on all columns at once
    for i in range(n):
        inv[i] = (eye[i] - L[i, :i] @ inv[:i]) / L[i, i]
    return inv
