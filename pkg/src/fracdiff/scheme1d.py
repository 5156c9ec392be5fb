"""Time stepping for the one-dimensional problem.

At level ``n`` the scheme solves ``A^n u^n = b^{n-1}`` with
``A^n = chat_0^{(n)} I + sigma K h^{-beta} G``.  Only two distinct matrices
occur (``n = 1`` and ``n >= 2``), so operators, preconditioners and
factorizations are built twice per run and reused.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .distorder import CoefficientLadder, TemporalCoefficients, build_quadrature, sigma_root
from .krylov import DEFAULT_TOL, SolveReport, pcg
from .problems import Problem1D
from .riesz import build_stencil
from .structured import (
    DENSE_CAP,
    CholeskyFactor,
    ShiftedCirculant1D,
    ShiftedToeplitz1D,
    SymToeplitz,
    build_circulant,
    to_dense,
)

SOLVERS = ("cholesky", "cg", "pcg")
PRECONDITIONERS = ("strang", "tchan", "rchan", "none")


class SolverFailure(RuntimeError):
    def __init__(self, step: int, report: SolveReport):
        super().__init__(
            f"linear solve failed at time step {step}: "
            f"{report.iterations} iterations, relative residual "
            f"{report.final_relative_residual:.3e}"
        )
        self.step = step
        self.report = report


@dataclass(frozen=True)
class Discretization1D:
    M: int
    N: int
    J: int
    solver: str = "pcg"
    precond: str = "rchan"
    tol: float = DEFAULT_TOL
    maxit: int | None = None
    dense_cap: int = DENSE_CAP

    def __post_init__(self):
        if self.M < 2 or self.N < 1 or self.J < 1:
            raise ValueError(f"need M >= 2, N >= 1, J >= 1; got {self.M}, {self.N}, {self.J}")
        check_solver(self.solver, self.precond)


def check_solver(solver: str, precond: str) -> None:
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; choose from {SOLVERS}")
    if precond not in PRECONDITIONERS:
        raise ValueError(f"unknown preconditioner {precond!r}; choose from {PRECONDITIONERS}")


@dataclass
class Solution1D:
    x: np.ndarray
    t: np.ndarray
    history: np.ndarray  # (N+1, M+1), boundary columns included
    reports: list[SolveReport]
    sigma: float
    chat0: tuple[float, float]  # chat_0^{(1)}, chat_0^{(n>=2)}
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


def history_term(history: np.ndarray, chat: np.ndarray) -> np.ndarray:
    """``sum_{k=1}^{n-1} (chat_{k-1} - chat_k) u^{n-k} + chat_{n-1} u^0`` for ``n = len(chat)``."""
    n = len(chat)
    out = chat[n - 1] * history[0]
    if n > 1:
        diffs = chat[:-1] - chat[1:]  # entry k-1 multiplies u^{n-k}
        out = out + diffs[::-1] @ history[1:n]
    return out


def assemble_rhs_1d(
    history: np.ndarray,
    coeffs: TemporalCoefficients,
    G: SymToeplitz,
    sigma: float,
    K: float,
    h: float,
    beta: float,
    f_slice: np.ndarray,
) -> np.ndarray:
    """Right-hand side ``b^{n-1}`` for level ``n = coeffs.n``.

    ``history`` holds interior values, row ``k`` being ``u^k``; rows
    ``0..n-1`` must be populated.
    """
    n = coeffs.n
    history = np.asarray(history, dtype=np.float64)
    if history.ndim != 2 or history.shape[1] != G.size:
        raise ValueError(f"history rows must have length {G.size}")
    if history.shape[0] < n:
        raise ValueError(f"history has {history.shape[0]} rows, level {n} needs {n}")
    f_slice = np.asarray(f_slice, dtype=np.float64)
    if f_slice.shape != (G.size,):
        raise ValueError(f"source slice must have shape ({G.size},)")

    b = -(1.0 - sigma) * K * h ** (-beta) * G.matvec(history[n - 1])
    return b + history_term(history, coeffs.chat) + f_slice


class _LevelSolver:
    """Linear solver for one of the two distinct system matrices."""

    def __init__(self, op, make_precond, make_dense, solver, precond, tol, maxit):
        self.op = op
        self.solver = solver
        self.tol = tol
        self.maxit = maxit
        self.factor = None
        self.precond = None
        if solver == "cholesky":
            self.factor = CholeskyFactor(make_dense())
        elif solver == "pcg" and precond != "none":
            self.precond = make_precond(precond)

    def solve(self, b: np.ndarray) -> SolveReport:
        if self.factor is not None:
            x = self.factor.solve(b)
            bnorm = np.linalg.norm(b)
            res = np.linalg.norm(self.op.matvec(x) - b) / bnorm if bnorm > 0 else 0.0
            return SolveReport(x, 0, float(res), True)
        return pcg(self.op, self.precond, b, tol=self.tol, maxit=self.maxit)


def solve_1d(problem: Problem1D, disc: Discretization1D) -> Solution1D:
    M, N = disc.M, disc.N
    h = problem.L / M
    tau = problem.T / N
    x = np.linspace(0.0, problem.L, M + 1)
    t = np.linspace(0.0, problem.T, N + 1)
    xi = x[1:-1]

    quad = build_quadrature(problem.weight, disc.J)
    sigma = sigma_root(quad, tau)
    ladder = CoefficientLadder(quad, tau, sigma, N)
    stencil = build_stencil(problem.beta, max(1, M - 2))
    G = SymToeplitz(stencil.symbol(M - 1))
    scale = sigma * problem.K * h ** (-problem.beta)

    history = np.zeros((N + 1, M - 1))
    history[0] = problem.initial(xi)

    solvers: dict[float, _LevelSolver] = {}
    reports: list[SolveReport] = []
    solve_seconds = 0.0
    for n in range(1, N + 1):
        coeffs = ladder.coefficients(n)
        shift = float(coeffs.chat[0])
        f_slice = problem.source(xi, (n - 1 + sigma) * tau)
        b = assemble_rhs_1d(history, coeffs, G, sigma, problem.K, h, problem.beta, f_slice)

        start = time.perf_counter()
        level = solvers.get(shift)
        if level is None:
            op = ShiftedToeplitz1D(shift, scale, G)
            level = _LevelSolver(
                op,
                lambda kind: ShiftedCirculant1D(shift, scale, build_circulant(kind, G)),
                lambda: to_dense(op, disc.dense_cap),
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

    full = np.zeros((N + 1, M + 1))
    full[:, 1:-1] = history
    return Solution1D(
        x=x,
        t=t,
        history=full,
        reports=reports,
        sigma=sigma,
        chat0=(ladder.chat0(1), ladder.chat0(2) if N >= 2 else ladder.chat0(1)),
        solve_seconds=solve_seconds,
        meta={"h": h, "tau": tau, "J": disc.J, "scale": scale},
    )


def max_error_1d(sol: Solution1D, exact) -> float:
    """Largest ``|exact(x_i, t_n) - u_i^n|`` over every grid point and level."""
    err = 0.0
    for n, tn in enumerate(sol.t):
        err = max(err, float(np.max(np.abs(exact(sol.x, tn) - sol.history[n]))))
    return err
