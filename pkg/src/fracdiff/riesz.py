"""Fractional centred-difference coefficients for the Riesz derivative."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RieszStencil:
    """Symmetric half ``g_0 .. g_K`` of the centred stencil; ``g_{-k} = g_k``."""

    beta: float
    g: np.ndarray

    def __len__(self) -> int:
        return len(self.g)

    def symbol(self, size: int) -> np.ndarray:
        """First column of the ``size x size`` Toeplitz matrix built from the stencil."""
        if size > len(self.g):
            raise ValueError(f"stencil holds {len(self.g)} coefficients, need {size}")
        return self.g[:size].copy()


def g0_closed_form(beta: float) -> float:
    return math.gamma(beta + 1.0) / math.gamma(beta / 2.0 + 1.0) ** 2


def closed_form(beta: float, k: int) -> float:
    """``(-1)**k Gamma(beta+1) / (Gamma(beta/2-k+1) Gamma(beta/2+k+1))``.

    Only usable while ``beta/2 - k + 1`` stays off the poles of Gamma.
    """
    return (
        (-1.0) ** k
        * math.gamma(beta + 1.0)
        / (math.gamma(beta / 2.0 - k + 1.0) * math.gamma(beta / 2.0 + k + 1.0))
    )


def build_stencil(beta: float, kmax: int) -> RieszStencil:
    """Coefficients ``g_0 .. g_kmax`` for ``1 < beta <= 2``.

    ``g_0`` comes from its closed form; the rest follow the recurrence
    ``g_k = (1 - (beta+1)/(beta/2+k)) g_{k-1}``, which never touches Gamma
    at non-positive arguments.
    """
    if not 1.0 < beta <= 2.0:
        raise ValueError(f"beta must lie in (1, 2], got {beta!r}")
    if int(kmax) != kmax or kmax < 1:
        raise ValueError(f"kmax must be a positive integer, got {kmax!r}")
    kmax = int(kmax)

    k = np.arange(1, kmax + 1, dtype=float)
    ratios = 1.0 - (beta + 1.0) / (beta / 2.0 + k)
    g = np.empty(kmax + 1)
    g[0] = g0_closed_form(beta)
    g[1:] = g[0] * np.cumprod(ratios)
    if beta == 2.0:
        # ratio at k = 2 is exactly zero; keep the tail exactly zero too
        g[2:] = 0.0
    return RieszStencil(beta=float(beta), g=g)
