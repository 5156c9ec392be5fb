"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

from __future__ import annotations

import numpy as np


def jacobi_eigvalsh(a: np.ndarray, tol: float, max_sweeps: int):
    n = a.shape[0]
    target = tol * tol * float(np.sum(a * a))

    def off2() -> float:
        return float(np.sum(a * a) - np.sum(np.diag(a) ** 2))

    sweep = 0
    current = off2()
    while current > target and sweep < max_sweeps:
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                app, aqq = a[p, p], a[q, q]
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                new_p = c * col_p - s * col_q
                new_q = s * col_p + c * col_q
                a[:, p] = new_p
                a[p, :] = new_p
                a[:, q] = new_q
                a[q, :] = new_q
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0
        current = off2()
    if current > target:
        raise ArithmeticError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    return np.diag(a).copy(), sweep


def cholesky(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        row = L[j, :j]
        s = a[j, j] - row @ row
        if not s > 0.0:
            raise ValueError(f"matrix is not positive definite (pivot {j})")
        d = np.sqrt(s)
        L[j, j] = d
        L[j + 1 :, j] = (a[j + 1 :, j] - L[j + 1 :, :j] @ row) / d
    return L


def cho_solve(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = L.shape[0]
    x = np.array(b, dtype=np.float64, copy=True)
    for i in range(n):
        x[i] = (x[i] - L[i, :i] @ x[:i]) / L[i, i]
    for i in range(n - 1, -1, -1):
        x[i] /= L[i, i]
        x[:i] -= L[i, :i] * x[i]
    return x
