"""Unknown/residual layout of the finite-dimensional Newton system.

Unknowns, in order::

    [a_2..a_N, b_2..b_N] for patch 1, ..., same for patch m,
    [x_1, y_1, ..., x_m, y_m]

Residual rows, in the same order::

    [int G_i cos(j b), j = 2..N;  int G_i sin(j b), j = 2..N]  for each patch,
    [int G_i sin(b), int G_i cos(b)]                           for each patch

The integrals are trapezoid sums on the collocation grid.  The base radii
are never unknowns: ``rho_i = rho_of(eps, g_i, kappa_i)`` so the flux
constraint holds identically.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .contour import FourierContour, PatchGeometry, rho_of, uniform_grid
from .errors import DomainError
from .functional import FunctionalContext, QuadratureConfig, eval_terms
from .green import GreenKernel

__all__ = ["ContinuationState", "Problem", "projection_matrices", "residual_parts", "residual_vector"]


@dataclass(frozen=True)
class Problem:
    """Fixed data of a construction: kernel, strengths, truncation, quadrature.

    Attributes
    ----------
    kernel : GreenKernel
    kappas : numpy.ndarray
        Patch fluxes ``kappa_i > 0``.
    n : int
        Truncation order ``N``.
    quad : QuadratureConfig
    """

    kernel: GreenKernel
    kappas: np.ndarray
    n: int = 64
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self):
        k = np.array(self.kappas, dtype=float).reshape(-1)
        if k.size < 1 or not np.all(k > 0):
            raise DomainError("fluxes kappa_i must be positive")
        k.setflags(write=False)
        object.__setattr__(self, "kappas", k)
        if int(self.n) < 2:
            raise DomainError("truncation order must be >= 2")
        object.__setattr__(self, "n", int(self.n))

    @property
    def m(self) -> int:
        return int(self.kappas.size)

    @property
    def gamma(self) -> float:
        return self.kernel.gamma

    @property
    def n_shape(self) -> int:
        """Number of shape unknowns per patch, ``2 (N - 1)``."""
        return 2 * (self.n - 1)

    @property
    def size(self) -> int:
        return self.m * (self.n_shape + 2)


@dataclass(frozen=True)
class ContinuationState:
    """One point ``(eps, x, rho, g)`` of the solution curve.

    Attributes
    ----------
    eps : float
    centers : numpy.ndarray, shape (m, 2)
    shapes : tuple of FourierContour
    kappas : numpy.ndarray
    gamma : float
    rhos : numpy.ndarray
        Always ``rho_of(eps, g_i, kappa_i)``.
    """

    eps: float
    centers: np.ndarray
    shapes: tuple
    kappas: np.ndarray
    gamma: float
    rhos: np.ndarray = field(init=False)

    def __post_init__(self):
        c = np.array(self.centers, dtype=float).reshape(-1, 2)
        k = np.array(self.kappas, dtype=float).reshape(-1)
        shapes = tuple(self.shapes)
        if not (c.shape[0] == k.size == len(shapes)):
            raise DomainError("centers, kappas and shapes disagree in length")
        if self.eps < 0:
            raise DomainError("continuation runs in eps >= 0")
        for s in shapes:
            if not isinstance(s, FourierContour):
                raise DomainError("shapes must be FourierContour instances")
        c.setflags(write=False)
        k.setflags(write=False)
        rhos = np.array([rho_of(self.eps, s, kk, self.gamma) for s, kk in zip(shapes, k)])
        rhos.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "kappas", k)
        object.__setattr__(self, "shapes", shapes)
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "rhos", rhos)

    @classmethod
    def initial(cls, centers, kappas, gamma: float, n: int, eps: float = 0.0) -> "ContinuationState":
        """Circular patches (``g = 0``) at the given centers."""
        c = np.asarray(centers, dtype=float).reshape(-1, 2)
        return cls(eps, c, tuple(FourierContour.zeros(n) for _ in range(c.shape[0])), kappas, gamma)

    @property
    def m(self) -> int:
        return int(self.centers.shape[0])

    @property
    def n(self) -> int:
        return self.shapes[0].n

    def geometries(self) -> list[PatchGeometry]:
        return [PatchGeometry(c, r, self.eps, s, self.gamma) for c, r, s in zip(self.centers, self.rhos, self.shapes)]

    def context(self, problem: Problem, check: bool = True) -> FunctionalContext:
        return FunctionalContext(problem.kernel, tuple(self.geometries()), problem.quad, check)

    def unknowns(self) -> np.ndarray:
        return np.concatenate([s.vector for s in self.shapes] + [self.centers.reshape(-1)])

    def with_unknowns(self, u) -> "ContinuationState":
        u = np.asarray(u, dtype=float)
        k = 2 * (self.n - 1)
        shapes = tuple(FourierContour.from_vector(u[i * k:(i + 1) * k]) for i in range(self.m))
        centers = u[self.m * k:].reshape(self.m, 2)
        return ContinuationState(self.eps, centers, shapes, self.kappas, self.gamma)

    def with_eps(self, eps: float) -> "ContinuationState":
        return ContinuationState(eps, self.centers, self.shapes, self.kappas, self.gamma)


@lru_cache(maxsize=32)
def _projections(n: int, m_grid: int):
    beta = uniform_grid(m_grid)
    j = np.arange(2, n + 1)
    h = 2.0 * np.pi / m_grid
    shape = h * np.concatenate([np.cos(np.outer(j, beta)), np.sin(np.outer(j, beta))])
    center = h * np.stack([np.sin(beta), np.cos(beta)])
    shape.setflags(write=False)
    center.setflags(write=False)
    return shape, center


def projection_matrices(n: int, m_grid: int) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid projection matrices onto ``cos/sin(j b)`` (``j >= 2``) and ``(sin b, cos b)``.

    Returns
    -------
    shape : numpy.ndarray, shape (2(N-1), M)
    center : numpy.ndarray, shape (2, M)
    """
    return _projections(int(n), int(m_grid))


def residual_parts(state: ContinuationState, problem: Problem, check: bool = True):
    """Per-patch grid values of the three terms.

    Returns
    -------
    ctx : FunctionalContext
    terms : numpy.ndarray, shape (m, 3, M)
    """
    ctx = state.context(problem, check)
    terms = np.stack([np.stack(eval_terms(ctx, i)) for i in range(ctx.m)])
    return ctx, terms


def assemble_rows(values: np.ndarray, n: int) -> np.ndarray:
    """Project per-patch grid values ``(m, M)`` into the residual layout."""
    ps, pc = projection_matrices(n, values.shape[1])
    shape_rows = [ps @ v for v in values]
    center_rows = [pc @ v for v in values]
    return np.concatenate(shape_rows + center_rows)


def residual_vector(state: ContinuationState, problem: Problem, check: bool = True) -> np.ndarray:
    """The residual in the layout described in the module docstring."""
    _, terms = residual_parts(state, problem, check)
    return assemble_rows(terms.sum(axis=1), state.n)
