# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled dense kernels: cyclic Jacobi eigenvalues and Cholesky."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


cdef double _offdiag_sq(double[:, ::1] a, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double s = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s += a[i, j] * a[i, j]
    return s


def jacobi_eigvalsh(double[:, ::1] a, double tol, int max_sweeps):
    """Eigenvalues of a symmetric matrix, overwriting ``a``; returns (values, sweeps)."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, r
    cdef double apq, theta, t, c, s, arp, arq, fro2 = 0.0, off2
    cdef int sweep = 0

    for p in range(n):
        for q in range(n):
            fro2 += a[p, q] * a[p, q]
    cdef double target = tol * tol * fro2

    with nogil:
        off2 = _offdiag_sq(a, n)
        while off2 > target:
            if sweep >= max_sweeps:
                break
            sweep += 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for r in range(n):
                        if r == p or r == q:
                            continue
                        arp = a[r, p]
                        arq = a[r, q]
                        a[r, p] = c * arp - s * arq
                        a[p, r] = a[r, p]
                        a[r, q] = s * arp + c * arq
                        a[q, r] = a[r, q]
                    a[p, p] = a[p, p] - t * apq
                    a[q, q] = a[q, q] + t * apq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
            off2 = _offdiag_sq(a, n)

    if off2 > target:
        raise ArithmeticError(
            f"Jacobi iteration did not converge in {max_sweeps} sweeps"
        )
    out = np.empty(n)
    cdef double[::1] w = out
    for p in range(n):
        w[p] = a[p, p]
    return out, sweep


def cholesky(double[:, ::1] a):
    """Lower-triangular ``L`` with ``L L^T = a``; raises on a non-positive pivot."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double s, d
    out = np.zeros((n, n))
    cdef double[:, ::1] L = out
    cdef Py_ssize_t bad = -1

    with nogil:
        for j in range(n):
            s = a[j, j]
            for k in range(j):
                s -= L[j, k] * L[j, k]
            if not s > 0.0:
                bad = j
                break
            d = sqrt(s)
            L[j, j] = d
            for i in range(j + 1, n):
                s = a[i, j]
                for k in range(j):
                    s -= L[i, k] * L[j, k]
                L[i, j] = s / d
    if bad >= 0:
        raise ValueError(f"matrix is not positive definite (pivot {bad})")
    return out


def cho_solve(double[:, ::1] L, double[::1] b):
    """Solve ``L L^T x = b`` by forward and back substitution."""
    cdef Py_ssize_t n = L.shape[0]
    cdef Py_ssize_t i, k
    cdef double s
    out = np.array(b, dtype=np.float64, copy=True)
    cdef double[::1] x = out

    with nogil:
        for i in range(n):
            s = x[i]
            for k in range(i):
                s -= L[i, k] * x[k]
            x[i] = s / L[i, i]
        # back substitution sweeping rows of L (contiguous)
        for i in range(n - 1, -1, -1):
            x[i] = x[i] / L[i, i]
            s = x[i]
            for k in range(i):
                x[k] -= L[i, k] * s
    return out
