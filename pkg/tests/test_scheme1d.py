import math

import mpmath
import numpy as np
import pytest

import oracle
from fracdiff.distorder import build_quadrature, sigma_root, temporal_coeffs
from fracdiff.problems import Problem1D, example1, gamma_weight
from fracdiff.riesz import build_stencil
from fracdiff.scheme1d import (
    Discretization1D,
    SolverFailure,
    assemble_rhs_1d,
    max_error_1d,
    solve_1d,
)
from fracdiff.structured import DenseCapExceeded, SymToeplitz


def smooth_problem(beta=1.5, K=0.7, L=1.0, T=1.0):
    return Problem1D(
        L=L, T=T, K=K, beta=beta, weight=gamma_weight,
        source=lambda x, t: np.sin(np.pi * x / L) * (1 + t * t) + x * t,
        initial=lambda x: np.sin(2 * np.pi * x / L),
    )


def zero_problem():
    return Problem1D(
        L=1.0, T=1.0, K=1.0, beta=1.6, weight=gamma_weight,
        source=lambda x, t: np.zeros_like(x), initial=lambda x: np.zeros_like(x),
    )


def test_zero_problem_stays_zero():
    sol = solve_1d(zero_problem(), Discretization1D(M=16, N=5, J=3))
    assert np.all(sol.history == 0.0)
    assert all(r.iterations == 0 for r in sol.reports)


def test_rhs_first_level():
    rng = np.random.default_rng(1)
    q = build_quadrature(gamma_weight, 2)
    s = sigma_root(q, 0.1)
    coeffs = temporal_coeffs(q, 0.1, s, 1)
    G = SymToeplitz(build_stencil(1.4, 4).symbol(5))
    u0 = rng.standard_normal(5)
    f = rng.standard_normal(5)
    b = assemble_rhs_1d(u0[None, :], coeffs, G, s, 2.0, 0.25, 1.4, f)
    expected = -(1 - s) * 2.0 * 0.25**-1.4 * (G.to_dense() @ u0) + coeffs.chat[0] * u0 + f
    np.testing.assert_allclose(b, expected, rtol=1e-13)


def test_rhs_zero_inputs():
    q = build_quadrature(gamma_weight, 1)
    coeffs = temporal_coeffs(q, 0.1, sigma_root(q, 0.1), 3)
    G = SymToeplitz(build_stencil(1.4, 4).symbol(5))
    b = assemble_rhs_1d(np.zeros((3, 5)), coeffs, G, 0.7, 1.0, 0.2, 1.4, np.zeros(5))
    np.testing.assert_array_equal(b, 0.0)


def test_rhs_triple_loop_oracle():
    rng = np.random.default_rng(7)
    M, n, beta, K, h = 6, 3, 1.7, 1.3, 1 / 6
    q = build_quadrature(gamma_weight, 3)
    tau = 0.05
    s = sigma_root(q, tau)
    coeffs = temporal_coeffs(q, tau, s, n)
    G = SymToeplitz(build_stencil(beta, M - 2).symbol(M - 1))
    hist = rng.standard_normal((n, M - 1))
    f = rng.standard_normal(M - 1)
    g = G.first_col
    c = coeffs.chat
    expected = np.zeros(M - 1)
    for i in range(M - 1):
        acc = 0.0
        for j in range(M - 1):
            acc += g[abs(i - j)] * hist[n - 1][j]
        value = -(1 - s) * K * h**-beta * acc
        for k in range(1, n):
            value += (c[k - 1] - c[k]) * hist[n - k][i]
        value += c[n - 1] * hist[0][i] + f[i]
        expected[i] = value
    got = assemble_rhs_1d(hist, coeffs, G, s, K, h, beta, f)
    np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-12)


def test_rhs_shape_checks():
    q = build_quadrature(gamma_weight, 1)
    coeffs = temporal_coeffs(q, 0.1, sigma_root(q, 0.1), 3)
    G = SymToeplitz([2.0, -1.0, 0.0])
    with pytest.raises(ValueError):
        assemble_rhs_1d(np.zeros((2, 3)), coeffs, G, 0.6, 1.0, 0.1, 1.5, np.zeros(3))
    with pytest.raises(ValueError):
        assemble_rhs_1d(np.zeros((3, 3)), coeffs, G, 0.6, 1.0, 0.1, 1.5, np.zeros(4))


@pytest.mark.parametrize("M,N,J", [(4, 2, 1), (6, 5, 2)])
@pytest.mark.parametrize("solver", ["cholesky", "cg", "pcg"])
def test_dense_oracle_stepper(M, N, J, solver):
    problem = smooth_problem()
    sol = solve_1d(problem, Discretization1D(M=M, N=N, J=J, solver=solver))
    tau = problem.T / N
    h = problem.L / M
    nodes, lam = oracle.quadrature(lambda a: mpmath.gamma(5 - a), J)
    s = oracle.sigma(nodes, lam, tau)
    ladders = {n: oracle.chat(nodes, lam, tau, s, n) for n in range(1, N + 1)}
    s = float(s)
    x = np.linspace(0, problem.L, M + 1)[1:-1]
    spatial = problem.K * h ** (-problem.beta) * oracle.riesz_matrix(problem.beta, M - 1)
    ref = oracle.step_all(spatial, s, ladders, lambda t: problem.source(x, t), problem.initial(x), tau, N)
    assert sol.sigma == pytest.approx(s, abs=1e-14)
    np.testing.assert_allclose(sol.history[:, 1:-1], ref, rtol=1e-11, atol=1e-12)
    np.testing.assert_array_equal(sol.history[:, [0, -1]], 0.0)


def test_solver_path_independence():
    problem = example1(1.6).problem
    finals = {}
    for solver, precond in [("cholesky", "none"), ("cg", "none"), ("pcg", "strang"), ("pcg", "tchan"), ("pcg", "rchan")]:
        sol = solve_1d(problem, Discretization1D(M=64, N=32, J=8, solver=solver, precond=precond))
        finals[(solver, precond)] = sol.final
    ref = finals[("cholesky", "none")]
    for key, value in finals.items():
        assert np.max(np.abs(value - ref)) <= 1e-9, key


def test_two_assemblies_only(monkeypatch):
    import fracdiff.scheme1d as mod

    built = []
    original = mod._LevelSolver.__init__

    def spy(self, *args, **kwargs):
        built.append(1)
        original(self, *args, **kwargs)

    monkeypatch.setattr(mod._LevelSolver, "__init__", spy)
    solve_1d(example1(1.5).problem, Discretization1D(M=16, N=9, J=2))
    assert len(built) == 2


def test_max_error_helpers():
    mp = example1(1.5)
    sol = solve_1d(mp.problem, Discretization1D(M=8, N=4, J=2))
    assert max_error_1d(sol, lambda x, t: sol.history[list(sol.t).index(t)]) == 0.0
    shifted = lambda x, t: sol.history[list(sol.t).index(t)] + 0.25  # noqa: E731
    assert max_error_1d(sol, shifted) == pytest.approx(0.25)


def test_reference_error_1d():
    mp = example1(1.5)
    sol = solve_1d(mp.problem, Discretization1D(M=64, N=1000, J=50))
    assert max_error_1d(sol, mp.problem.exact) == pytest.approx(1.538522e-05, rel=5e-3)
    assert sol.average_iterations < 12


@pytest.mark.parametrize("axis", ["space", "time"])
def test_second_order_rates(axis):
    mp = example1(1.4)
    errors = []
    for level in range(2):
        if axis == "space":
            disc = Discretization1D(M=32 * 2**level, N=1000, J=50)
        else:
            disc = Discretization1D(M=1000, N=8 * 2**level, J=50)
        errors.append(max_error_1d(solve_1d(mp.problem, disc), mp.problem.exact))
    assert 1.85 <= math.log2(errors[0] / errors[1]) <= 2.15


def test_discretization_validation():
    with pytest.raises(ValueError):
        Discretization1D(M=1, N=4, J=1)
    with pytest.raises(ValueError):
        Discretization1D(M=8, N=4, J=1, solver="gmres")
    with pytest.raises(ValueError):
        Discretization1D(M=8, N=4, J=1, precond="ilu")


def test_dense_cap_enforced():
    with pytest.raises(DenseCapExceeded):
        solve_1d(zero_problem(), Discretization1D(M=40, N=2, J=1, solver="cholesky", dense_cap=20))


def test_solver_failure_reported():
    with pytest.raises(SolverFailure) as info:
        solve_1d(example1(1.5).problem, Discretization1D(M=64, N=4, J=2, solver="cg", maxit=2))
    assert info.value.step == 1
    assert not info.value.report.converged


def test_metadata():
    sol = solve_1d(example1(1.5).problem, Discretization1D(M=8, N=3, J=2))
    assert sol.history.shape == (4, 9)
    assert min(sol.chat0) > 0 and sol.chat0[0] != sol.chat0[1]
    assert sol.meta["tau"] == pytest.approx(0.5)
    np.testing.assert_array_equal(sol.final, sol.history[-1])
