"""Acceptance suite: one pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in
the terminal summary under "acceptance criteria".
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from fracdiff import cli
from fracdiff.distorder import CoefficientLadder, build_quadrature, f_sigma, sigma_root
from fracdiff.krylov import precond_spectrum
from fracdiff.problems import example1, example2, gamma_weight
from fracdiff.riesz import build_stencil
from fracdiff.scheme1d import Discretization1D, max_error_1d, solve_1d
from fracdiff.scheme2d import Discretization2D, max_error_2d, solve_2d
from fracdiff.structured import (
    BccbPrecond,
    KronSum2D,
    ShiftedCirculant1D,
    ShiftedToeplitz1D,
    SymToeplitz,
    build_circulant,
)


def report(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def rel(value, target):
    return abs(value / target - 1.0)


def error_1d(beta, M, N, J, **kw):
    mp = example1(beta)
    sol = solve_1d(mp.problem, Discretization1D(M=M, N=N, J=J, **kw))
    return max_error_1d(sol, mp.problem.exact), sol


def error_2d(beta, M, N, J, **kw):
    mp = example2(beta, beta)
    sol = solve_2d(mp.problem, Discretization2D.square(M, N, J, **kw))
    return max_error_2d(sol, mp.problem.exact), sol


def test_criterion_1_spatial_errors():
    targets = {(1.2, 32): 3.423357e-05, (1.5, 64): 1.538522e-05, (1.8, 128): 5.789457e-06}
    parts, ok = [], True
    for (beta, M), target in targets.items():
        start = time.perf_counter()
        err, _ = error_1d(beta, M, 1000, 50)
        elapsed = time.perf_counter() - start
        ok &= rel(err, target) <= 5e-3 and elapsed < 60
        parts.append(f"beta={beta} M={M} e={err:.6e} ({rel(err, target):.2%}, {elapsed:.1f}s)")
    report(1, ok, "; ".join(parts))


def test_criterion_2_temporal_errors():
    e8, _ = error_1d(1.5, 1000, 8, 50)
    e16, _ = error_1d(1.5, 1000, 16, 50)
    rate = math.log2(e8 / e16)
    ok = rel(e8, 6.193316e-04) <= 5e-3 and rel(e16, 1.590357e-04) <= 5e-3 and abs(rate - 1.9614) <= 0.02
    report(2, ok, f"e8={e8:.6e} ({rel(e8, 6.193316e-04):.2%}), e16={e16:.6e} "
                  f"({rel(e16, 1.590357e-04):.2%}), rate={rate:.4f}")


def test_criterion_3_distributed_order():
    errors = [error_1d(1.2, 500, 500, J)[0] for J in (2, 4, 8)]
    rates = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
    full, _ = error_1d(1.2, 2000, 2000, 2)
    ok = all(1.85 <= r <= 2.15 for r in rates) and rel(full, 3.774623e-05) <= 5e-3
    report(3, ok, f"rates J=2->4->8 at M=N=500: {', '.join(f'{r:.4f}' for r in rates)}; "
                  f"full scale J=2 e={full:.6e} ({rel(full, 3.774623e-05):.2%})")


def test_criterion_4_two_dimensional_errors():
    a, _ = error_2d(1.2, 8, 2000, 50)
    b, _ = error_2d(1.8, 16, 2000, 50)
    ok = rel(a, 1.287397e-05) <= 5e-3 and rel(b, 8.121444e-06) <= 5e-3
    report(4, ok, f"beta=1.2 M=8 e={a:.6e} ({rel(a, 1.287397e-05):.2%}); "
                  f"beta=1.8 M=16 e={b:.6e} ({rel(b, 8.121444e-06):.2%})")


def test_criterion_5_two_dimensional_time():
    e8, _ = error_2d(1.8, 300, 8, 50)
    e16, _ = error_2d(1.8, 300, 16, 50)
    rate = math.log2(e8 / e16)
    ok = rel(e8, 1.550841e-05) <= 1e-2 and abs(rate - 1.9308) <= 0.03
    report(5, ok, f"e8={e8:.6e} ({rel(e8, 1.550841e-05):.2%}), rate={rate:.4f}")


def test_criterion_6_iteration_counts():
    _, pcg = error_1d(1.8, 2**10, 2**8, 50, precond="rchan")
    _, cg = error_1d(1.8, 2**10, 2**8, 50, solver="cg")
    _, pcg2 = error_2d(1.8, 2**6, 2**5, 50, precond="rchan")
    a, b, c = pcg.average_iterations, cg.average_iterations, pcg2.average_iterations
    ok = abs(a - 8.0) <= 1 and rel(b, 402.0) <= 0.05 and abs(c - 15.0) <= 1
    report(6, ok, f"1D PCG(rchan)={a:.2f}, 1D CG={b:.2f}, 2D PCG(rchan)={c:.2f}")


def _dominant(A):
    d = np.abs(np.diag(A))
    return bool(np.all(d > np.abs(A).sum(axis=1) - d))


def test_criterion_7_properties():
    rng = np.random.default_rng(7)
    checks = {}

    ok = True
    for _ in range(40):
        a, b = rng.uniform(0, 3, 2)
        q = build_quadrature(lambda al: 0.05 + a + b * al * al, int(rng.integers(1, 40)))
        tau = float(rng.uniform(1e-4, 1.0))
        s = sigma_root(q, tau)
        ok &= 0.5 <= s <= 1.0 and abs(f_sigma(q, tau, s)) < 1e-12
    checks["sigma"] = ok

    ok = True
    for weight, J, tau in ((gamma_weight, 50, 1.5 / 512), (lambda al: 1.0, 4, 0.01), (lambda al: math.exp(-4 * al), 16, 0.5)):
        q = build_quadrature(weight, J)
        ladder = CoefficientLadder(q, tau, sigma_root(q, tau), 512)
        for n in range(1, 513):
            c = ladder.at(n)
            ok &= bool(np.all(np.diff(c) < 0)) and c[-1] > ladder.coefficients(n).lower_bound(q) > 0
    checks["ladder"] = ok

    ok = True
    for beta in np.round(np.arange(1.1, 2.01, 0.1), 1):
        g = build_stencil(beta, 4096).g
        partial = g[0] + 2 * np.cumsum(g[1:])
        ok &= g[0] > 0 and bool(np.all(g[1:] <= 0)) and bool(np.all(partial >= -1e-12))
    checks["stencil"] = ok

    ok = True
    for n in (2, 17, 64, 257):
        T = SymToeplitz(rng.standard_normal(n))
        v = rng.standard_normal(n)
        d = T.to_dense() @ v
        ok &= np.linalg.norm(T.matvec(v) - d) <= 1e-12 * np.linalg.norm(d)
    op = KronSum2D(1.0, 0.5, 2.0, SymToeplitz(rng.standard_normal(12)), SymToeplitz(rng.standard_normal(12)))
    v = rng.standard_normal(144)
    d = op.to_dense() @ v
    ok &= np.linalg.norm(op.matvec(v) - d) <= 1e-12 * np.linalg.norm(d)
    checks["fft matvec"] = ok

    ok = True
    for beta, M, N in ((1.2, 32, 1000), (1.8, 128, 128), (1.5, 16, 8)):
        tau = 1.5 / N
        q = build_quadrature(gamma_weight, 50)
        s = sigma_root(q, tau)
        ladder = CoefficientLadder(q, tau, s, 2)
        G = SymToeplitz(build_stencil(beta, M - 2).symbol(M - 1))
        scale = s * M**beta
        for shift in (ladder.chat0(1), ladder.chat0(2)):
            ok &= _dominant(ShiftedToeplitz1D(shift, scale, G).to_dense())
            ok &= _dominant(ShiftedCirculant1D(shift, scale, build_circulant("rchan", G)).to_dense())
            if M <= 32:
                ok &= _dominant(KronSum2D(shift, scale, scale, G, G).to_dense())
                C = build_circulant("rchan", G)
                ok &= _dominant(BccbPrecond(shift, scale, scale, C, C).to_dense())
    checks["dominance"] = ok

    finals1 = [solve_1d(example1(1.6).problem, Discretization1D(M=64, N=32, J=8, solver=s, precond=p)).final
               for s, p in (("cholesky", "none"), ("cg", "none"), ("pcg", "rchan"))]
    finals2 = [solve_2d(example2(1.5, 1.7).problem, Discretization2D.square(24, 16, 4, solver=s, precond=p)).final
               for s, p in (("cholesky", "none"), ("cg", "none"), ("pcg", "rchan"))]
    checks["solver paths"] = all(np.max(np.abs(f - fs[0])) <= 1e-9 for fs in (finals1, finals2) for f in fs)

    report(7, all(checks.values()), ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in checks.items()))


def test_criterion_8_spectrum_clustering():
    cfg = cli.build_config({}, {"beta": 1.8, "M": 128, "N": 128, "J": 50, "precond": "rchan"})
    A, C = cli.level_operators(cfg, cli.load_problem(cfg), 1)
    values = precond_spectrum(A, C)
    inside = float(np.mean((values >= 0.5) & (values <= 1.5)))
    ok = inside >= 0.95 and values.min() > 1e-3
    report(8, ok, f"{inside:.1%} in [0.5, 1.5], min={values.min():.4f}, max={values.max():.3f}")


def test_criterion_9_scaling():
    mp = example1(1.8)
    times = []
    for M in (2**9, 2**10, 2**11, 2**12):
        times.append(min(solve_1d(mp.problem, Discretization1D(M=M, N=128, J=50)).solve_seconds for _ in range(7)))
    ratios = [b / a for a, b in zip(times, times[1:])]
    report(9, all(r <= 2.5 for r in ratios),
           "PCG seconds " + ", ".join(f"{t:.4f}" for t in times) + "; ratios " + ", ".join(f"{r:.2f}" for r in ratios))
