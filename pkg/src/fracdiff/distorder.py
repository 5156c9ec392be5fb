"""Distributed-order time discretization.

The integral over the order ``alpha`` is replaced by a composite trapezoid
rule, which turns the problem into a multi-term Caputo equation.  The
multi-term derivative is collocated at the off-grid time ``t_{n-1+sigma}``
and approximated by a ladder of coefficients ``chat_k^{(n)}`` weighting the
history differences ``u^{n-k} - u^{n-k-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

WeightFunction = Callable[[float], float]

SIGMA_TOL = 1e-14
# beyond this abscissa the b_l differences switch to the asymptotic series
_SERIES_START = 2.5
_SERIES_TERMS = 64


@dataclass(frozen=True)
class Quadrature:
    """Trapezoid nodes ``alpha_r = r * dalpha`` and weights ``lambda_r``."""

    J: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def step(self) -> float:
        return 1.0 / (2 * self.J)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return len(self.nodes)


def build_quadrature(weight: WeightFunction, J: int) -> Quadrature:
    """Discretize ``int_0^1 weight(alpha) D^alpha u dalpha`` on ``2J`` intervals.

    :arg weight: non-negative weight function on ``[0, 1]``.
    :arg J: half the number of intervals; the grid always contains both
        endpoints ``alpha = 0`` and ``alpha = 1``.
    """
    if int(J) != J or J < 1:
        raise ValueError(f"J must be a positive integer, got {J!r}")
    J = int(J)
    m = 2 * J
    dalpha = 1.0 / m
    nodes = np.arange(m + 1) * dalpha
    nodes[-1] = 1.0

    values = np.array([float(weight(a)) for a in nodes])
    if not np.all(np.isfinite(values)):
        raise ValueError("weight function produced a non-finite value")
    if np.any(values < 0):
        bad = nodes[values < 0]
        raise ValueError(f"weight function is negative at alpha = {bad.tolist()}")

    d = np.ones(m + 1)
    d[0] = d[-1] = 0.5
    weights = d * values * dalpha
    if not weights.sum() > 0:
        raise ValueError("weight function vanishes at every quadrature node")
    return Quadrature(J=J, nodes=nodes, weights=weights)


def f_sigma(quad: Quadrature, tau: float, sigma: float) -> float:
    """The function whose positive root selects the collocation point."""
    total = 0.0
    for alpha, lam in zip(quad.nodes, quad.weights):
        total += (
            lam
            / math.gamma(3.0 - alpha)
            * sigma ** (1.0 - alpha)
            * (sigma - (1.0 - alpha / 2.0))
            * tau ** (2.0 - alpha)
        )
    return total


def sigma_root(quad: Quadrature, tau: float, tol: float = SIGMA_TOL) -> float:
    """Locate the unique root of :func:`f_sigma` in ``[1/2, 1]`` by bisection."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau!r}")

    lo, hi = 0.5, 1.0
    f_lo = f_sigma(quad, tau, lo)
    f_hi = f_sigma(quad, tau, hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo > 0 or f_hi < 0:
        raise ValueError(
            "no sign change of F(sigma) on [1/2, 1]; the weight function is invalid"
        )

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = f_sigma(quad, tau, mid)
        if f_mid == 0.0:
            return mid
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _power_difference(upper: np.ndarray, p: float) -> np.ndarray:
    """``upper**p - (upper - 1)**p`` without cancellation for large ``upper``."""
    lower = upper - 1.0
    out = np.empty_like(upper)
    big = lower > 0
    # upper**p * (1 - (1 - 1/upper)**p)
    ub = upper[big]
    out[big] = -(ub**p) * np.expm1(p * np.log1p(-1.0 / ub))
    out[~big] = upper[~big] ** p - lower[~big] ** p
    return out


def _trapezoid_defect(upper: np.ndarray, alpha: float) -> np.ndarray:
    """``b_l`` for ``upper = l + sigma``.

    Equals ``int_{upper-1}^{upper} s**p ds - (upper**p + (upper-1)**p) / 2``
    with ``p = 1 - alpha``.  For large arguments the two terms nearly cancel,
    so the difference is summed from its expansion in ``1/upper``.
    """
    p = 1.0 - alpha
    q = 2.0 - alpha
    out = np.empty_like(upper)

    small = upper < _SERIES_START
    us = upper[small]
    out[small] = (us**q - (us - 1.0) ** q) / q - 0.5 * (us**p + (us - 1.0) ** p)

    ub = upper[~small]
    if ub.size:
        x = 1.0 / ub
        # coefficient of x**k: (-1)**k [C(q, k+1)/q - C(p, k)/2]; k = 0, 1 vanish
        binom_q = np.empty(_SERIES_TERMS + 2)
        binom_p = np.empty(_SERIES_TERMS + 1)
        binom_q[0] = binom_p[0] = 1.0
        for j in range(1, _SERIES_TERMS + 2):
            binom_q[j] = binom_q[j - 1] * (q - j + 1) / j
        for j in range(1, _SERIES_TERMS + 1):
            binom_p[j] = binom_p[j - 1] * (p - j + 1) / j
        series = np.zeros_like(ub)
        for k in range(_SERIES_TERMS, 1, -1):
            coef = (-1.0) ** k * (binom_q[k + 1] / q - 0.5 * binom_p[k])
            series = series * x + coef
        out[~small] = ub**p * series * x * x
    return out


def _ab_tables(alpha: float, sigma: float, length: int) -> tuple[np.ndarray, np.ndarray]:
    """``a_l`` for ``l = 0..length-1`` and ``b_l`` (index 0 unused) for one order."""
    a = np.empty(length)
    b = np.zeros(length)
    a[0] = sigma ** (1.0 - alpha)
    if length > 1:
        upper = np.arange(1, length) + sigma
        a[1:] = _power_difference(upper, 1.0 - alpha)
        b[1:] = _trapezoid_defect(upper, alpha)
    return a, b


def _order_scale(quad: Quadrature, tau: float) -> np.ndarray:
    return np.array(
        [
            lam * tau ** (-alpha) / math.gamma(2.0 - alpha)
            for alpha, lam in zip(quad.nodes, quad.weights)
        ]
    )


def _order_coefficients(alpha: float, sigma: float, n: int) -> np.ndarray:
    """``c_k^{(n, alpha)}`` for ``k = 0..n-1``."""
    if alpha == 1.0:
        c = np.zeros(n)
        c[0] = 1.0
        return c
    if alpha == 0.0:
        c = np.ones(n)
        c[0] = sigma
        return c

    a, b = _ab_tables(alpha, sigma, n + 1)
    if n == 1:
        return a[:1].copy()
    c = np.empty(n)
    c[0] = a[0] + b[1]
    c[1 : n - 1] = a[1 : n - 1] + b[2:n] - b[1 : n - 1]
    c[n - 1] = a[n - 1] - b[n - 1]
    return c


@dataclass(frozen=True)
class TemporalCoefficients:
    sigma: float
    tau: float
    n: int
    chat: np.ndarray

    def lower_bound(self, quad: Quadrature) -> float:
        """The positive floor that ``chat[n-1]`` must exceed."""
        t = self.n - 1 + self.sigma
        return float(
            sum(
                s * (1.0 - alpha) / 2.0 * t ** (-alpha)
                for s, alpha in zip(_order_scale(quad, self.tau), quad.nodes)
            )
        )


def temporal_coeffs(
    quad: Quadrature, tau: float, sigma: float, n: int
) -> TemporalCoefficients:
    """Assemble ``chat_0^{(n)} .. chat_{n-1}^{(n)}`` order by order.

    This is the direct O(n * m) construction; :class:`CoefficientLadder` is
    the cached variant used by the time-stepping drivers.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"time level n must be >= 1, got {n!r}")
    n = int(n)
    scale = _order_scale(quad, tau)
    chat = np.zeros(n)
    for s, alpha in zip(scale, quad.nodes):
        if s == 0.0:
            continue
        chat += s * _order_coefficients(float(alpha), sigma, n)
    return TemporalCoefficients(sigma=sigma, tau=tau, n=n, chat=chat)


class CoefficientLadder:
    """All ladders ``chat^{(n)}`` for ``1 <= n <= nmax`` from one precomputation.

    Interior entries ``chat_k^{(n)}`` with ``1 <= k <= n-2`` do not depend on
    ``n``; only the first and last entries change with the level.
    """

    def __init__(self, quad: Quadrature, tau: float, sigma: float, nmax: int):
        if nmax < 1:
            raise ValueError("nmax must be >= 1")
        self.quad = quad
        self.tau = tau
        self.sigma = sigma
        self.nmax = nmax

        scale = _order_scale(quad, tau)
        first_n1 = 0.0
        first = 0.0
        interior = np.zeros(nmax)  # index k: a_k + b_{k+1} - b_k
        last = np.zeros(nmax)  # index k: a_k - b_k
        for s, alpha in zip(scale, quad.nodes):
            if s == 0.0:
                continue
            alpha = float(alpha)
            if alpha == 1.0:
                first_n1 += s
                first += s
                continue
            if alpha == 0.0:
                first_n1 += s * sigma
                first += s * sigma
                interior[1:] += s
                last[1:] += s
                continue
            a, b = _ab_tables(alpha, sigma, nmax + 1)
            first_n1 += s * a[0]
            first += s * (a[0] + b[1])
            interior[1:] += s * (a[1:nmax] + b[2 : nmax + 1] - b[1:nmax])
            last[1:] += s * (a[1:nmax] - b[1:nmax])
        self.first_n1 = first_n1
        self.first = first
        self._interior = interior
        self._last = last

    def chat0(self, n: int) -> float:
        return self.first_n1 if n == 1 else self.first

    def at(self, n: int) -> np.ndarray:
        if not 1 <= n <= self.nmax:
            raise ValueError(f"time level {n} outside 1..{self.nmax}")
        if n == 1:
            return np.array([self.first_n1])
        chat = np.empty(n)
        chat[0] = self.first
        chat[1 : n - 1] = self._interior[1 : n - 1]
        chat[n - 1] = self._last[n - 1]
        return chat

    def coefficients(self, n: int) -> TemporalCoefficients:
        return TemporalCoefficients(self.sigma, self.tau, n, self.at(n))
