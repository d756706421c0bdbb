"""Stationary vortex patches of the generalized SQG equation in bounded domains.

The package desingularizes nondegenerate critical points of the
Kirchhoff-Routh function into families of convex patches, following the
solution curve in the patch size ``eps`` by Newton continuation.

Modules
-------
special
    Gamma-function constants and the multipliers ``sigma_j``.
green
    Free-space and disc kernels.
kr
    Kirchhoff-Routh function and its critical points.
contour
    Fourier boundary parametrisation and geometric diagnostics.
functional
    The nonlinear boundary functional and its zero-size limits.
linop
    The linearised operator and the Newton matrix.
solver
    Newton iteration, continuation and verification.
cli
    Command-line runner.
"""
from .config import RunConfig, load_config
from .contour import FourierContour, PatchGeometry, norm_X, norm_Y, rho_of, signed_curvature
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    GeometryError,
    GsqgError,
    InfeasibleFluxError,
    NotInRangeError,
    PoleError,
    SingularityError,
    SingularJacobianError,
)
from .functional import FunctionalContext, QuadratureConfig, eval_G, eval_G1, eval_G2, eval_G3
from .green import DiscKernel, FreeSpaceKernel, GreenKernel, disc, free_space, make_kernel
from .kr import CriticalPoint, VortexConfiguration, find_critical_points, grad_w_m, hess_w_m, w_m
from .linop import SpectralOperator, apply_L0, assemble_jacobian, invert_L0
from .solver import ContinuationState, Problem, continue_in_eps, newton_solve, residual, verify_solution
from .special import GammaParam, c_gamma, sigma, sigma_spectrum, trig_moment

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "RunConfig", "load_config",
    "FourierContour", "PatchGeometry", "norm_X", "norm_Y", "rho_of", "signed_curvature",
    "ConfigError", "ConvergenceError", "DomainError", "GeometryError", "GsqgError", "InfeasibleFluxError",
    "NotInRangeError", "PoleError", "SingularityError", "SingularJacobianError",
    "FunctionalContext", "QuadratureConfig", "eval_G", "eval_G1", "eval_G2", "eval_G3",
    "DiscKernel", "FreeSpaceKernel", "GreenKernel", "disc", "free_space", "make_kernel",
    "CriticalPoint", "VortexConfiguration", "find_critical_points", "grad_w_m", "hess_w_m", "w_m",
    "SpectralOperator", "apply_L0", "assemble_jacobian", "invert_L0",
    "ContinuationState", "Problem", "continue_in_eps", "newton_solve", "residual", "verify_solution",
    "GammaParam", "c_gamma", "sigma", "sigma_spectrum", "trig_moment",
]
