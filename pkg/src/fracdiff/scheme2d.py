"""Time stepping for the two-dimensional problem.

The system matrix at level ``n`` is the Kronecker sum
``chat_0 I + sigma K1 h1^{-beta} (I kron Gx) + sigma K2 h2^{-gamma} (Gy kron I)``
and is preconditioned by the level-2 circulant obtained by replacing
``Gx``, ``Gy`` with their circulant approximations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .distorder import CoefficientLadder, TemporalCoefficients, build_quadrature, sigma_root
from .krylov import DEFAULT_TOL, SolveReport
from .problems import Problem2D
from .riesz import build_stencil
from .scheme1d import SolverFailure, _LevelSolver, check_solver, history_term
from .structured import (
    BccbPrecond,
    DenseCapExceeded,
    KronSum2D,
    SymToeplitz,
    build_circulant,
    to_dense,
    vectorize,
)

# interior unknowns allowed on the dense Cholesky path
CHOLESKY_CAP_2D = 64 * 64


@dataclass(frozen=True)
class Discretization2D:
    M1: int
    M2: int
    N: int
    J: int
    solver: str = "pcg"
    precond: str = "rchan"
    tol: float = DEFAULT_TOL
    maxit: int | None = None
    dense_cap: int = CHOLESKY_CAP_2D

    def __post_init__(self):
        if self.M1 < 2 or self.M2 < 2 or self.N < 1 or self.J < 1:
            raise ValueError("need M1, M2 >= 2, N >= 1, J >= 1")
        check_solver(self.solver, self.precond)

    @classmethod
    def square(cls, M: int, N: int, J: int, **kw) -> "Discretization2D":
        return cls(M1=M, M2=M, N=N, J=J, **kw)


@dataclass
class Solution2D:
    x: np.ndarray
    y: np.ndarray
    t: np.ndarray
    history: np.ndarray  # (N+1, M2+1, M1+1): level, y index, x index
    reports: list[SolveReport]
    sigma: float
    chat0: tuple[float, float]
    solve_seconds: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.history[-1]

    @property
    def average_iterations(self) -> float:
        if not self.reports:
            return 0.0
        return sum(r.iterations for r in self.reports) / len(self.reports)


def assemble_rhs_2d(
    history: np.ndarray,
    coeffs: TemporalCoefficients,
    Gx: SymToeplitz,
    Gy: SymToeplitz,
    sigma: float,
    K1: float,
    K2: float,
    h1: float,
    h2: float,
    beta: float,
    gamma: float,
    f_slice: np.ndarray,
) -> np.ndarray:
    """Right-hand side ``p^{n-1}``; ``history`` rows are x-fastest interior vectors."""
    n = coeffs.n
    size = Gx.size * Gy.size
    history = np.asarray(history, dtype=np.float64)
    if history.ndim != 2 or history.shape[1] != size:
        raise ValueError(f"history rows must have length {size}")
    if history.shape[0] < n:
        raise ValueError(f"history has {history.shape[0]} rows, level {n} needs {n}")
    f_slice = np.asarray(f_slice, dtype=np.float64).reshape(-1)
    if f_slice.shape != (size,):
        raise ValueError(f"source slice must have {size} entries")

    spatial = KronSum2D(0.0, K1 * h1 ** (-beta), K2 * h2 ** (-gamma), Gx, Gy)
    b = -(1.0 - sigma) * spatial.operator_part(history[n - 1])
    return b + history_term(history, coeffs.chat) + f_slice


def solve_2d(problem: Problem2D, disc: Discretization2D) -> Solution2D:
    M1, M2, N = disc.M1, disc.M2, disc.N
    h1 = problem.L1 / M1
    h2 = problem.L2 / M2
    tau = problem.T / N
    x = np.linspace(0.0, problem.L1, M1 + 1)
    y = np.linspace(0.0, problem.L2, M2 + 1)
    t = np.linspace(0.0, problem.T, N + 1)
    X = x[None, 1:-1]
    Y = y[1:-1, None]
    nx, ny = M1 - 1, M2 - 1

    if disc.solver == "cholesky" and nx * ny > disc.dense_cap:
        raise DenseCapExceeded(
            f"dense Cholesky limited to {disc.dense_cap} unknowns, got {nx * ny}"
        )

    quad = build_quadrature(problem.weight, disc.J)
    sigma = sigma_root(quad, tau)
    ladder = CoefficientLadder(quad, tau, sigma, N)
    Gx = SymToeplitz(build_stencil(problem.beta, max(1, M1 - 2)).symbol(nx))
    Gy = SymToeplitz(build_stencil(problem.gamma, max(1, M2 - 2)).symbol(ny))
    scale_x = sigma * problem.K1 * h1 ** (-problem.beta)
    scale_y = sigma * problem.K2 * h2 ** (-problem.gamma)

    history = np.zeros((N + 1, nx * ny))
    history[0] = vectorize(np.broadcast_to(problem.initial(X, Y), (ny, nx)))

    solvers: dict[float, _LevelSolver] = {}
    reports: list[SolveReport] = []
    solve_seconds = 0.0
    for n in range(1, N + 1):
        coeffs = ladder.coefficients(n)
        shift = float(coeffs.chat[0])
        f_slice = np.broadcast_to(problem.source(X, Y, (n - 1 + sigma) * tau), (ny, nx))
        b = assemble_rhs_2d(
            history, coeffs, Gx, Gy, sigma, problem.K1, problem.K2,
            h1, h2, problem.beta, problem.gamma, f_slice,
        )

        start = time.perf_counter()
        level = solvers.get(shift)
        if level is None:
            op = KronSum2D(shift, scale_x, scale_y, Gx, Gy)

            def make_precond(kind, shift=shift):
                return BccbPrecond(
                    shift, scale_x, scale_y,
                    build_circulant(kind, Gx), build_circulant(kind, Gy),
                )

            level = _LevelSolver(
                op,
                make_precond,
                lambda op=op: to_dense(op, disc.dense_cap),
                disc.solver,
                disc.precond,
                disc.tol,
                disc.maxit,
            )
            solvers[shift] = level
        report = level.solve(b)
        solve_seconds += time.perf_counter() - start
        if not report.converged:
            raise SolverFailure(n, report)
        history[n] = report.solution
        reports.append(report)

    full = np.zeros((N + 1, M2 + 1, M1 + 1))
    full[:, 1:-1, 1:-1] = history.reshape(N + 1, ny, nx)
    return Solution2D(
        x=x,
        y=y,
        t=t,
        history=full,
        reports=reports,
        sigma=sigma,
        chat0=(ladder.chat0(1), ladder.chat0(2) if N >= 2 else ladder.chat0(1)),
        solve_seconds=solve_seconds,
        meta={"h1": h1, "h2": h2, "tau": tau, "J": disc.J},
    )


def max_error_2d(sol: Solution2D, exact) -> float:
    X = sol.x[None, :]
    Y = sol.y[:, None]
    err = 0.0
    for n, tn in enumerate(sol.t):
        err = max(err, float(np.max(np.abs(exact(X, Y, tn) - sol.history[n]))))
    return err

