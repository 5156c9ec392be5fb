"""Problem definitions and the manufactured-solution registry."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .distorder import WeightFunction


@dataclass(frozen=True)
class Problem1D:
    """``D^omega u = K d^beta u / d|x|^beta + f`` on ``(0, L) x (0, T]``, ``u = 0`` at ``x = 0, L``.

    ``source(x, t)``, ``initial(x)`` and ``exact(x, t)`` take numpy arrays for ``x``.
    """

    L: float
    T: float
    K: float
    beta: float
    weight: WeightFunction
    source: Callable[[np.ndarray, float], np.ndarray]
    initial: Callable[[np.ndarray], np.ndarray]
    exact: Optional[Callable[[np.ndarray, float], np.ndarray]] = None

    def __post_init__(self):
        if not self.L > 0 or not self.T > 0:
            raise ValueError("L and T must be positive")
        if not self.K > 0:
            raise ValueError(f"K must be positive, got {self.K!r}")
        if not 1.0 < self.beta <= 2.0:
            raise ValueError(f"beta must lie in (1, 2], got {self.beta!r}")


@dataclass(frozen=True)
class Problem2D:
    """Two-dimensional analogue on ``(0, L1) x (0, L2)``.

    ``source(x, y, t)``, ``initial(x, y)`` and ``exact(x, y, t)`` are called
    with broadcastable arrays (``x`` varying along the last axis).  One of
    ``K1``, ``K2`` may be zero, which decouples the lines in that direction.
    """

    L1: float
    L2: float
    T: float
    K1: float
    K2: float
    beta: float
    gamma: float
    weight: WeightFunction
    source: Callable[[np.ndarray, np.ndarray, float], np.ndarray]
    initial: Callable[[np.ndarray, np.ndarray], np.ndarray]
    exact: Optional[Callable[[np.ndarray, np.ndarray, float], np.ndarray]] = None

    def __post_init__(self):
        if not (self.L1 > 0 and self.L2 > 0 and self.T > 0):
            raise ValueError("L1, L2 and T must be positive")
        if self.K1 < 0 or self.K2 < 0 or not (self.K1 > 0 or self.K2 > 0):
            raise ValueError("K1, K2 must be non-negative and not both zero")
        for name in ("beta", "gamma"):
            value = getattr(self, name)
            if not 1.0 < value <= 2.0:
                raise ValueError(f"{name} must lie in (1, 2], got {value!r}")


Problem = Union[Problem1D, Problem2D]


@dataclass(frozen=True)
class ManufacturedProblem:
    name: str
    dimension: int
    problem: Problem


def log_ratio(t: float) -> float:
    """``(t - 1) / ln t`` extended continuously to ``t = 1`` and ``t -> 0+``."""
    if t < 1e-300:
        return 0.0
    s = t - 1.0
    if abs(s) < 1e-6:
        return 1.0 + s / 2.0 - s * s / 12.0
    return s / math.log(t)


def gamma_weight(alpha: float) -> float:
    return math.gamma(5.0 - alpha)


def _riesz_constant(order: float) -> float:
    return -1.0 / (2.0 * math.cos(order * math.pi / 2.0))


def _bump(x):
    return x**3 * (1.0 - x) ** 3


def _riesz_of_bump(x: np.ndarray, order: float) -> np.ndarray:
    """``f1 - 3 f2 + 3 f3 - f4``: the two one-sided derivatives of ``x^3 (1-x)^3``."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    for power, coef in ((3, 1.0), (4, -3.0), (5, 3.0), (6, -1.0)):
        ratio = math.gamma(power + 1) / math.gamma(power + 1 - order)
        e = power - order
        out = out + coef * ratio * (x**e + (1.0 - x) ** e)
    return out


def _check_open_order(name: str, value: float) -> None:
    if not 1.0 < value < 2.0:
        raise ValueError(f"{name} must lie in (1, 2) for this example, got {value!r}")


def example1(beta: float) -> ManufacturedProblem:
    """Weight ``Gamma(5 - alpha)``, ``K = 1``, exact solution ``t^4 x^3 (1-x)^3``."""
    _check_open_order("beta", beta)
    c = _riesz_constant(beta)

    def source(x, t):
        x = np.asarray(x, dtype=np.float64)
        f0 = 24.0 * t**3 * log_ratio(t) * _bump(x)
        return f0 - c * t**4 * _riesz_of_bump(x, beta)

    def exact(x, t):
        return t**4 * _bump(np.asarray(x, dtype=np.float64))

    problem = Problem1D(
        L=1.0,
        T=1.5,
        K=1.0,
        beta=beta,
        weight=gamma_weight,
        source=source,
        initial=lambda x: np.zeros_like(np.asarray(x, dtype=np.float64)),
        exact=exact,
    )
    return ManufacturedProblem(f"example1(beta={beta})", 1, problem)


def example2(beta: float, gamma: float) -> ManufacturedProblem:
    """Two-dimensional analogue with exact solution ``t^4 x^3 (1-x)^3 y^3 (1-y)^3``."""
    _check_open_order("beta", beta)
    _check_open_order("gamma", gamma)
    c1 = _riesz_constant(beta)
    c2 = _riesz_constant(gamma)

    def source(x, y, t):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        bx, by = _bump(x), _bump(y)
        f0 = 24.0 * t**3 * log_ratio(t) * bx * by
        return (
            f0
            - c1 * t**4 * by * _riesz_of_bump(x, beta)
            - c2 * t**4 * bx * _riesz_of_bump(y, gamma)
        )

    def exact(x, y, t):
        return t**4 * _bump(np.asarray(x, dtype=np.float64)) * _bump(
            np.asarray(y, dtype=np.float64)
        )

    problem = Problem2D(
        L1=1.0,
        L2=1.0,
        T=1.5,
        K1=1.0,
        K2=1.0,
        beta=beta,
        gamma=gamma,
        weight=gamma_weight,
        source=source,
        initial=lambda x, y: np.zeros(np.broadcast(x, y).shape),
        exact=exact,
    )
    return ManufacturedProblem(f"example2(beta={beta}, gamma={gamma})", 2, problem)


REGISTRY: dict[str, Callable[..., ManufacturedProblem]] = {
    "example1": lambda beta, gamma=None: example1(beta),
    "example2": lambda beta, gamma=None: example2(beta, beta if gamma is None else gamma),
}


def registry_lookup(name: str, beta: float, gamma: Optional[float] = None) -> ManufacturedProblem:
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown problem {name!r}; available: {', '.join(sorted(REGISTRY))}"
        ) from None
    return factory(beta, gamma)


def register(name: str, factory: Callable[..., ManufacturedProblem]) -> None:
    """Add a user problem; ``factory(beta, gamma=None)`` must return a ManufacturedProblem."""
    if name in REGISTRY:
        raise ValueError(f"problem {name!r} is already registered")
    REGISTRY[name] = factory
