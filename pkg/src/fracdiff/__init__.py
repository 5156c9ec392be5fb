"""Second-order difference schemes and circulant-preconditioned CG for
time distributed-order, Riesz space fractional diffusion in 1D and 2D."""

from .distorder import (
    CoefficientLadder,
    Quadrature,
    TemporalCoefficients,
    build_quadrature,
    f_sigma,
    sigma_root,
    temporal_coeffs,
)
from .krylov import SolveReport, cg, pcg, precond_spectrum, spectrum
from .problems import Problem1D, Problem2D, example1, example2, registry_lookup
from .riesz import RieszStencil, build_stencil
from .scheme1d import Discretization1D, Solution1D, max_error_1d, solve_1d
from .scheme2d import Discretization2D, Solution2D, max_error_2d, solve_2d

__version__ = "0.1.0"
