"""Symmetric Toeplitz, circulant and two-level (BTTB / BCCB) operators.

All matrix-vector products and circulant solves go through the FFT.  Dense
forms exist for reference solvers and test oracles only and are capped in
size.

Two-level vectors are ordered with the x index fastest: the interior field
is stored as an array of shape ``(ny, nx)`` in C order, so
``vec[i + j * nx] == field[j, i]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

DENSE_CAP = 4096
SINGULAR_RTOL = 1e-14


class SingularOperatorError(ArithmeticError):
    pass


class DenseCapExceeded(ValueError):
    pass


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


class SymToeplitz:
    """Symmetric Toeplitz matrix with entry ``(i, j) = first_col[|i - j|]``.

    Products use a circulant embedding of length ``next_pow2(2 * size)``:
    ``first_col`` at the head, its mirror image (without the diagonal) at the
    tail, zeros in between.
    """

    def __init__(self, first_col):
        col = np.asarray(first_col, dtype=np.float64)
        if col.ndim != 1 or col.size == 0:
            raise ValueError("first_col must be a non-empty 1-D array")
        self.first_col = col
        self.size = col.size
        n = self.size
        self.embed_size = _next_pow2(2 * n)
        embed = np.zeros(self.embed_size)
        embed[:n] = col
        if n > 1:
            embed[self.embed_size - n + 1 :] = col[1:][::-1]
        self._embed_hat = np.fft.rfft(embed)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.size, self.size)

    def apply_along(self, x: np.ndarray, axis: int = -1) -> np.ndarray:
        """Multiply every 1-D line of ``x`` along ``axis``."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[axis] != self.size:
            raise ValueError(
                f"dimension mismatch: operator size {self.size}, got {x.shape[axis]}"
            )
        xhat = np.fft.rfft(x, n=self.embed_size, axis=axis)
        shape = [1] * x.ndim
        shape[axis] = -1
        y = np.fft.irfft(xhat * self._embed_hat.reshape(shape), n=self.embed_size, axis=axis)
        return np.take(y, np.arange(self.size), axis=axis)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError("matvec expects a 1-D vector")
        return self.apply_along(v)

    def to_dense(self) -> np.ndarray:
        idx = np.arange(self.size)
        return self.first_col[np.abs(idx[:, None] - idx[None, :])]


def toeplitz_matvec(T: SymToeplitz, v: np.ndarray) -> np.ndarray:
    return T.matvec(v)


class CirculantOp:
    """Circulant matrix given by its first column, diagonalized by the DFT."""

    def __init__(self, first_col):
        col = np.asarray(first_col, dtype=np.float64)
        if col.ndim != 1 or col.size == 0:
            raise ValueError("first_col must be a non-empty 1-D array")
        self.first_col = col
        self.size = col.size
        self.eigenvalues = np.fft.fft(col)

    @property
    def real_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues.real

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.size,):
            raise ValueError(f"dimension mismatch: {self.size} vs {v.shape}")
        return np.fft.ifft(np.fft.fft(v) * self.eigenvalues).real

    def solve(self, b: np.ndarray) -> np.ndarray:
        return circulant_solve(self, b)

    def to_dense(self) -> np.ndarray:
        idx = np.arange(self.size)
        return self.first_col[(idx[:, None] - idx[None, :]) % self.size]


def _check_invertible(eig: np.ndarray) -> None:
    mag = np.abs(eig)
    if mag.size and mag.min() < SINGULAR_RTOL * mag.max():
        raise SingularOperatorError(
            f"singular preconditioner: |eigenvalue| {mag.min():.3e} "
            f"below {SINGULAR_RTOL:g} * {mag.max():.3e}"
        )


def circulant_solve(C: CirculantOp, b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (C.size,):
        raise ValueError(f"dimension mismatch: {C.size} vs {b.shape}")
    _check_invertible(C.eigenvalues)
    return np.fft.ifft(np.fft.fft(b) / C.eigenvalues).real


def _require_size(T: SymToeplitz) -> int:
    if T.size < 2:
        raise ValueError("circulant approximation needs a matrix of size >= 2")
    return T.size


def circulant_strang(T: SymToeplitz) -> CirculantOp:
    """Keep the central diagonals, wrap the rest: ``s_k = t_k`` for ``k <= n//2``."""
    n = _require_size(T)
    g = T.first_col
    k = np.arange(n)
    return CirculantOp(np.where(k <= n // 2, g[k], g[(n - k) % n]))


def circulant_tchan(T: SymToeplitz) -> CirculantOp:
    """Frobenius-optimal circulant: ``c_k = ((n-k) t_k + k t_{n-k}) / n``.

    The formula is the standard optimal-circulant construction for a
    symmetric Toeplitz matrix (T. Chan, 1988).
    """
    n = _require_size(T)
    g = T.first_col
    k = np.arange(n)
    return CirculantOp(((n - k) * g[k] + k * g[(n - k) % n]) / n)


def circulant_rchan(T: SymToeplitz) -> CirculantOp:
    """Uses every entry: ``r_0 = t_0``, ``r_k = t_k + t_{n-k}`` for ``0 < k < n``."""
    n = _require_size(T)
    g = T.first_col
    col = g.copy()
    col[1:] = g[1:] + g[1:][::-1]
    return CirculantOp(col)


CIRCULANTS = {
    "strang": circulant_strang,
    "tchan": circulant_tchan,
    "rchan": circulant_rchan,
}


def build_circulant(kind: str, T: SymToeplitz) -> CirculantOp:
    try:
        builder = CIRCULANTS[kind]
    except KeyError:
        raise ValueError(f"unknown circulant {kind!r}; choose from {sorted(CIRCULANTS)}") from None
    return builder(T)


@dataclass(frozen=True)
class ShiftedToeplitz1D:
    """``shift * I + scale * G``."""

    shift: float
    scale: float
    G: SymToeplitz

    @property
    def size(self) -> int:
        return self.G.size

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.size,):
            raise ValueError(f"dimension mismatch: {self.size} vs {v.shape}")
        if self.scale == 0.0:
            return self.shift * v
        return self.shift * v + self.scale * self.G.matvec(v)

    def to_dense(self) -> np.ndarray:
        return self.shift * np.eye(self.size) + self.scale * self.G.to_dense()


def apply_1d(A: ShiftedToeplitz1D, v: np.ndarray) -> np.ndarray:
    return A.matvec(v)


def _is_symmetric(col: np.ndarray) -> bool:
    return bool(np.array_equal(col[1:], col[1:][::-1]))


def _is_smooth(n: int, largest: int = 13) -> bool:
    """True when every prime factor of ``n`` is at most ``largest``."""
    for p in (2, 3, 5, 7, 11, 13):
        if p > largest:
            break
        while n % p == 0:
            n //= p
    return n == 1


class _PaddedCirculant:
    """Circular convolution with a fixed column through a power-of-two FFT.

    Used when the circulant size has large prime factors, where a direct
    transform of that length is slow.
    """

    def __init__(self, col: np.ndarray):
        self.size = col.size
        self.length = _next_pow2(2 * self.size - 1)
        self._hat = np.fft.rfft(col, n=self.length)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        n = self.size
        full = np.fft.irfft(np.fft.rfft(v, n=self.length) * self._hat, n=self.length)
        out = full[:n].copy()
        out[: n - 1] += full[n : 2 * n - 1]
        return out


@dataclass(frozen=True)
class ShiftedCirculant1D:
    """``shift * I + scale * C`` for a circulant ``C``; the 1-D preconditioner.

    A symmetric ``C`` has a real, even spectrum, so products and solves use
    the half-length real transform, or a padded power-of-two convolution
    when the size factors badly.
    """

    shift: float
    scale: float
    C: CirculantOp
    eigenvalues: np.ndarray = field(init=False, repr=False)
    _forward: object = field(init=False, repr=False)
    _inverse: object = field(init=False, repr=False)

    def __post_init__(self):
        symmetric = _is_symmetric(self.C.first_col)
        spectrum = self.C.real_eigenvalues if symmetric else self.C.eigenvalues
        eig = self.shift + self.scale * spectrum
        _check_invertible(eig)
        object.__setattr__(self, "eigenvalues", eig)
        n = self.size
        if not symmetric:
            forward = lambda v: np.fft.ifft(np.fft.fft(v) * eig).real  # noqa: E731
            inverse = lambda v: np.fft.ifft(np.fft.fft(v) / eig).real  # noqa: E731
        elif _is_smooth(n) or n < 64:
            half = eig[: n // 2 + 1]
            forward = lambda v: np.fft.irfft(np.fft.rfft(v) * half, n=n)  # noqa: E731
            inverse = lambda v: np.fft.irfft(np.fft.rfft(v) / half, n=n)  # noqa: E731
        else:
            col = self.scale * self.C.first_col
            col[0] += self.shift
            forward = _PaddedCirculant(col)
            inverse = _PaddedCirculant(np.fft.irfft(1.0 / eig[: n // 2 + 1], n=n))
        object.__setattr__(self, "_forward", forward)
        object.__setattr__(self, "_inverse", inverse)

    @property
    def size(self) -> int:
        return self.C.size

    def _check(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.size,):
            raise ValueError(f"dimension mismatch: {self.size} vs {v.shape}")
        return v

    def solve(self, b: np.ndarray) -> np.ndarray:
        return self._inverse(self._check(b))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self._forward(self._check(v))

    def to_dense(self) -> np.ndarray:
        return self.shift * np.eye(self.size) + self.scale * self.C.to_dense()


def vectorize(field2d: np.ndarray) -> np.ndarray:
    """``(ny, nx)`` interior field to the x-fastest vector."""
    return np.ascontiguousarray(field2d).reshape(-1)


def devectorize(vec: np.ndarray, nx: int, ny: int) -> np.ndarray:
    vec = np.asarray(vec)
    if vec.size != nx * ny:
        raise ValueError(f"dimension mismatch: {vec.size} vs {nx} x {ny}")
    return vec.reshape(ny, nx)


@dataclass(frozen=True)
class KronSum2D:
    """``shift * I + scale_x * (I_y kron Gx) + scale_y * (Gy kron I_x)``."""

    shift: float
    scale_x: float
    scale_y: float
    Gx: SymToeplitz
    Gy: SymToeplitz

    @property
    def nx(self) -> int:
        return self.Gx.size

    @property
    def ny(self) -> int:
        return self.Gy.size

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def operator_part(self, v: np.ndarray) -> np.ndarray:
        """``(scale_x * I kron Gx + scale_y * Gy kron I) v`` without the shift."""
        u = devectorize(v, self.nx, self.ny)
        out = np.zeros_like(u, dtype=np.float64)
        if self.scale_x != 0.0:
            out += self.scale_x * self.Gx.apply_along(u, axis=1)
        if self.scale_y != 0.0:
            out += self.scale_y * self.Gy.apply_along(u, axis=0)
        return vectorize(out)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.size,):
            raise ValueError(f"dimension mismatch: {self.size} vs {v.shape}")
        return self.shift * v + self.operator_part(v)

    def to_dense(self) -> np.ndarray:
        Ix = np.eye(self.nx)
        Iy = np.eye(self.ny)
        return (
            self.shift * np.eye(self.size)
            + self.scale_x * np.kron(Iy, self.Gx.to_dense())
            + self.scale_y * np.kron(self.Gy.to_dense(), Ix)
        )


def apply_2d(M: KronSum2D, v: np.ndarray) -> np.ndarray:
    return M.matvec(v)


@dataclass(frozen=True)
class BccbPrecond:
    """Level-2 circulant ``shift * I + scale_x * (I kron cx) + scale_y * (cy kron I)``.

    ``eigen_grid[j, k] = shift + scale_x * eig(cx)[j] + scale_y * eig(cy)[k]``,
    indexed (x, y).
    """

    shift: float
    scale_x: float
    scale_y: float
    cx: CirculantOp
    cy: CirculantOp
    eigen_grid: np.ndarray = field(init=False, repr=False)
    _half: np.ndarray | None = field(init=False, repr=False)

    def __post_init__(self):
        grid = (
            self.shift
            + self.scale_x * self.cx.real_eigenvalues[:, None]
            + self.scale_y * self.cy.real_eigenvalues[None, :]
        )
        _check_invertible(grid)
        object.__setattr__(self, "eigen_grid", grid)
        # (ny, nx//2 + 1) slice for the real transform when both factors are symmetric
        half = None
        if _is_symmetric(self.cx.first_col) and _is_symmetric(self.cy.first_col):
            half = np.ascontiguousarray(grid.T[:, : self.nx // 2 + 1])
        object.__setattr__(self, "_half", half)

    @property
    def nx(self) -> int:
        return self.cx.size

    @property
    def ny(self) -> int:
        return self.cy.size

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def _apply(self, v: np.ndarray, inverse: bool) -> np.ndarray:
        u = devectorize(np.asarray(v, dtype=np.float64), self.nx, self.ny)
        if self._half is not None:
            half = 1.0 / self._half if inverse else self._half
            return vectorize(np.fft.irfft2(np.fft.rfft2(u) * half, s=u.shape))
        grid = 1.0 / self.eigen_grid.T if inverse else self.eigen_grid.T
        return vectorize(np.fft.ifft2(np.fft.fft2(u) * grid).real)

    def solve(self, b: np.ndarray) -> np.ndarray:
        return self._apply(b, inverse=True)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self._apply(v, inverse=False)

    def to_dense(self) -> np.ndarray:
        return (
            self.shift * np.eye(self.size)
            + self.scale_x * np.kron(np.eye(self.ny), self.cx.to_dense())
            + self.scale_y * np.kron(self.cy.to_dense(), np.eye(self.nx))
        )


def bccb_solve(P: BccbPrecond, b: np.ndarray) -> np.ndarray:
    return P.solve(b)


def to_dense(op, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense matrix of any operator in this module, refusing sizes above ``cap``."""
    size = op.size
    if size > cap:
        raise DenseCapExceeded(f"operator of size {size} exceeds dense cap {cap}")
    return op.to_dense()


class CholeskyFactor:
    """Reusable ``L L^T`` factorization of a dense SPD matrix."""

    def __init__(self, A: np.ndarray):
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("Cholesky needs a square matrix")
        self.L = kernels.cholesky(A)
        self.size = A.shape[0]

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=np.float64)
        if b.shape != (self.size,):
            raise ValueError(f"dimension mismatch: {self.size} vs {b.shape}")
        return kernels.cho_solve(self.L, b)


def cholesky_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    return CholeskyFactor(A).solve(b)
