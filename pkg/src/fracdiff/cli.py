"""Command-line harness: convergence studies, solver comparisons, spectra, single solves.

Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 dense cap exceeded.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distorder import CoefficientLadder, build_quadrature, sigma_root
from .krylov import BreakdownError, precond_spectrum, spectrum
from .problems import ManufacturedProblem, registry_lookup
from .riesz import build_stencil
from .scheme1d import Discretization1D, SolverFailure, max_error_1d, solve_1d
from .scheme2d import Discretization2D, max_error_2d, solve_2d
from .structured import (
    DENSE_CAP,
    BccbPrecond,
    DenseCapExceeded,
    KronSum2D,
    ShiftedCirculant1D,
    ShiftedToeplitz1D,
    SingularOperatorError,
    SymToeplitz,
    build_circulant,
    to_dense,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_CAP = 4

AXES = ("space", "time", "distorder")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    problem: str = "example1"
    beta: float = 1.5
    gamma: Optional[float] = None
    K: Optional[float] = None
    T: Optional[float] = None
    L: Optional[float] = None
    M: int = 32
    N: int = 100
    J: int = 50
    solver: str = "pcg"
    precond: str = "rchan"
    levels: int = 3
    axis: str = "space"
    out: Optional[str] = None
    dense_cap: int = DENSE_CAP
    level: int = 1
    history: bool = False


_FIELD_TYPES = {
    "problem": str,
    "beta": float,
    "gamma": float,
    "K": float,
    "T": float,
    "L": float,
    "M": int,
    "N": int,
    "J": int,
    "solver": str,
    "precond": str,
    "levels": int,
    "axis": str,
    "out": str,
    "dense_cap": int,
    "level": int,
    "history": bool,
}


def _convert(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    if kind is bool:
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind.__name__}") from None


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; unknown keys are errors."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    return values


def build_config(file_values: dict, flag_values: dict) -> RunConfig:
    merged = {**file_values, **{k: v for k, v in flag_values.items() if v is not None}}
    cfg = RunConfig(**merged)
    if cfg.axis not in AXES:
        raise ConfigError(f"axis must be one of {AXES}, got {cfg.axis!r}")
    if cfg.levels < 1:
        raise ConfigError("levels must be >= 1")
    if cfg.level not in (1, 2):
        raise ConfigError("level must be 1 or 2")
    return cfg


def _fmt(value: float) -> str:
    return repr(float(value))


def _csv(header: str, rows) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    for row in rows:
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def load_problem(cfg: RunConfig) -> ManufacturedProblem:
    """Registry problem with ``T``, ``K``, ``L`` overrides applied.

    Overriding ``K`` or ``L`` invalidates the manufactured solution, which is
    then dropped.
    """
    try:
        mp = registry_lookup(cfg.problem, cfg.beta, cfg.gamma)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None
    p = mp.problem
    changes = {}
    if cfg.T is not None:
        changes["T"] = cfg.T
    if cfg.K is not None or cfg.L is not None:
        changes["exact"] = None
        if mp.dimension == 1:
            changes.update({k: v for k, v in (("K", cfg.K), ("L", cfg.L)) if v is not None})
        else:
            if cfg.K is not None:
                changes.update(K1=cfg.K, K2=cfg.K)
            if cfg.L is not None:
                changes.update(L1=cfg.L, L2=cfg.L)
    if changes:
        p = dataclasses.replace(p, **changes)
    return ManufacturedProblem(mp.name, mp.dimension, p)


def run_solve(mp: ManufacturedProblem, cfg: RunConfig, M=None, N=None, J=None,
              solver=None, precond=None):
    M = cfg.M if M is None else M
    N = cfg.N if N is None else N
    J = cfg.J if J is None else J
    solver = solver or cfg.solver
    precond = precond or cfg.precond
    if mp.dimension == 1:
        disc = Discretization1D(M=M, N=N, J=J, solver=solver, precond=precond,
                                dense_cap=cfg.dense_cap)
        return solve_1d(mp.problem, disc)
    disc = Discretization2D.square(M, N, J, solver=solver, precond=precond,
                                   dense_cap=min(cfg.dense_cap, 64 * 64))
    return solve_2d(mp.problem, disc)


def max_error(mp: ManufacturedProblem, sol) -> float:
    if mp.problem.exact is None:
        raise ConfigError(f"problem {mp.name} has no exact solution")
    if mp.dimension == 1:
        return max_error_1d(sol, mp.problem.exact)
    return max_error_2d(sol, mp.problem.exact)


@dataclass(frozen=True)
class ConvergenceRow:
    param: int
    error: float
    rate: Optional[float]


def convergence_rows(cfg: RunConfig) -> list[ConvergenceRow]:
    mp = load_problem(cfg)
    if mp.problem.exact is None:
        raise ConfigError(f"problem {mp.name} has no exact solution")
    rows: list[ConvergenceRow] = []
    prev = None
    for lvl in range(cfg.levels):
        factor = 2**lvl
        M, N, J = cfg.M, cfg.N, cfg.J
        if cfg.axis == "space":
            M *= factor
            param = M
        elif cfg.axis == "time":
            N *= factor
            param = N
        else:
            J *= factor
            param = J
        err = max_error(mp, run_solve(mp, cfg, M=M, N=N, J=J))
        rate = None if prev is None else math.log2(prev / err)
        rows.append(ConvergenceRow(param, err, rate))
        prev = err
    return rows


def cmd_converge(cfg: RunConfig) -> str:
    rows = convergence_rows(cfg)
    return _csv(
        "param,error,rate",
        ([str(r.param), _fmt(r.error), "" if r.rate is None else _fmt(r.rate)] for r in rows),
    )


COMPARE_METHODS = (
    ("cholesky", "cholesky", "none"),
    ("cg", "cg", "none"),
    ("pcg_strang", "pcg", "strang"),
    ("pcg_tchan", "pcg", "tchan"),
    ("pcg_rchan", "pcg", "rchan"),
)


def cmd_compare(cfg: RunConfig) -> str:
    mp = load_problem(cfg)
    unknowns = (cfg.M - 1) ** mp.dimension
    cap = cfg.dense_cap if mp.dimension == 1 else min(cfg.dense_cap, 64 * 64)
    rows = []
    for name, solver, precond in COMPARE_METHODS:
        if solver == "cholesky" and unknowns > cap:
            rows.append([name, "", "skipped"])
            continue
        sol = run_solve(mp, cfg, solver=solver, precond=precond)
        rows.append([name, _fmt(sol.solve_seconds), _fmt(sol.average_iterations)])
    return _csv("method,cpu_seconds,avg_iters", rows)


def level_operators(cfg: RunConfig, mp: ManufacturedProblem, n: int):
    """Dense ``A^n`` (or ``M^n``) and its circulant preconditioner at level ``n``."""
    p = mp.problem
    kind = cfg.precond if cfg.precond != "none" else "rchan"
    tau = p.T / cfg.N
    quad = build_quadrature(p.weight, cfg.J)
    sigma = sigma_root(quad, tau)
    shift = CoefficientLadder(quad, tau, sigma, max(n, 1)).chat0(n)
    M = cfg.M
    if mp.dimension == 1:
        G = SymToeplitz(build_stencil(p.beta, max(1, M - 2)).symbol(M - 1))
        scale = sigma * p.K * (p.L / M) ** (-p.beta)
        A = ShiftedToeplitz1D(shift, scale, G)
        C = ShiftedCirculant1D(shift, scale, build_circulant(kind, G))
    else:
        Gx = SymToeplitz(build_stencil(p.beta, max(1, M - 2)).symbol(M - 1))
        Gy = SymToeplitz(build_stencil(p.gamma, max(1, M - 2)).symbol(M - 1))
        sx = sigma * p.K1 * (p.L1 / M) ** (-p.beta)
        sy = sigma * p.K2 * (p.L2 / M) ** (-p.gamma)
        A = KronSum2D(shift, sx, sy, Gx, Gy)
        C = BccbPrecond(shift, sx, sy, build_circulant(kind, Gx), build_circulant(kind, Gy))
    return to_dense(A, cfg.dense_cap), to_dense(C, cfg.dense_cap)


def spectra(cfg: RunConfig, level: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
    mp = load_problem(cfg)
    n = cfg.level if level is None else level
    A, C = level_operators(cfg, mp, n)
    return spectrum(A), precond_spectrum(A, C)


def cmd_spectrum(cfg: RunConfig, level: Optional[int] = None) -> str:
    original, preconditioned = spectra(cfg, level)
    rows = [[str(i), _fmt(v), "original"] for i, v in enumerate(original)]
    rows += [[str(i), _fmt(v), "preconditioned"] for i, v in enumerate(preconditioned)]
    return _csv("index,eigenvalue,kind", rows)


def cmd_solve(cfg: RunConfig) -> str:
    mp = load_problem(cfg)
    sol = run_solve(mp, cfg)
    p = mp.problem
    meta = {
        "problem": cfg.problem,
        "dimension": mp.dimension,
        "beta": p.beta,
        "gamma": getattr(p, "gamma", ""),
        "T": p.T,
        "M": cfg.M,
        "N": cfg.N,
        "J": cfg.J,
        "solver": cfg.solver,
        "precond": cfg.precond,
        "sigma": _fmt(sol.sigma),
        "chat0_n1": _fmt(sol.chat0[0]),
        "chat0_n2": _fmt(sol.chat0[1]),
        "avg_iters": _fmt(sol.average_iterations),
    }
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key} = {value}\n")
    levels = range(len(sol.t)) if cfg.history else [len(sol.t) - 1]
    if mp.dimension == 1:
        buf.write("t,x,u\n")
        for n in levels:
            for xi, ui in zip(sol.x, sol.history[n]):
                buf.write(f"{_fmt(sol.t[n])},{_fmt(xi)},{_fmt(ui)}\n")
    else:
        buf.write("t,x,y,u\n")
        for n in levels:
            for j, yj in enumerate(sol.y):
                for i, xi in enumerate(sol.x):
                    buf.write(f"{_fmt(sol.t[n])},{_fmt(xi)},{_fmt(yj)},{_fmt(sol.history[n][j, i])}\n")
    return buf.getvalue()


def read_solution(text: str) -> tuple[dict, dict]:
    """Parse :func:`cmd_solve` output into ``(metadata, columns)``."""
    meta = {}
    lines = text.splitlines()
    idx = 0
    while idx < len(lines) and lines[idx].startswith("#"):
        key, value = lines[idx][1:].split("=", 1)
        meta[key.strip()] = value.strip()
        idx += 1
    header = lines[idx].split(",")
    data = np.array(
        [[float(v) for v in line.split(",")] for line in lines[idx + 1 :] if line],
        dtype=np.float64,
    ).reshape(-1, len(header))
    return meta, {name: data[:, k] for k, name in enumerate(header)}


COMMANDS = {
    "converge": cmd_converge,
    "compare": cmd_compare,
    "spectrum": cmd_spectrum,
    "solve": cmd_solve,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracdiff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", help="flat 'key = value' configuration file")
        cmd.add_argument("--problem")
        cmd.add_argument("--beta", type=float)
        cmd.add_argument("--gamma", type=float)
        cmd.add_argument("--K", type=float)
        cmd.add_argument("--T", type=float)
        cmd.add_argument("--L", type=float)
        cmd.add_argument("--M", type=int)
        cmd.add_argument("--N", type=int)
        cmd.add_argument("--J", type=int)
        cmd.add_argument("--solver", choices=("cholesky", "cg", "pcg"))
        cmd.add_argument("--precond", choices=("strang", "tchan", "rchan", "none"))
        cmd.add_argument("--levels", type=int)
        cmd.add_argument("--axis", choices=AXES)
        cmd.add_argument("--out", help="output path (default: stdout)")
        cmd.add_argument("--dense-cap", dest="dense_cap", type=int)
        if name == "spectrum":
            cmd.add_argument("--level", type=int, help="time level n (1 or 2)")
        if name == "solve":
            cmd.add_argument("--history", action="store_const", const=True,
                             help="write every time level, not just the last")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        file_values = {}
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                file_values = parse_config_text(fh.read())
        cfg = build_config(file_values, flags)
        output = COMMANDS[args.command](cfg)
    except DenseCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (SolverFailure, BreakdownError, SingularOperatorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(output)
    else:
        sys.stdout.write(output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
