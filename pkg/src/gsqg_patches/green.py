"""Green kernels of the inverse fractional Laplacian.

The velocity kernel splits as ``K = K1 + K0`` with the free-space singular
part ``K1(x, y) = C_gamma |x - y|**(-gamma)`` and a smooth remainder ``K0``
that carries the boundary.  Two domains are built in:

* the disc of radius ``R`` with the restricted fractional Laplacian, whose
  Green function is known in closed form, and
* the whole plane, where ``K0`` vanishes identically.

All evaluations broadcast over leading axes; points are arrays whose last
axis has length 2.

Notes
-----
For the unit disc, with ``a = gamma/2``, ``d = |x - y|``,
``P = (1 - |x|^2)(1 - |y|^2)``, ``Q = d^2 + P`` and ``w = d^2/Q``::

    G(x, y)  =  C_gamma d**(-gamma) I_{1-w}(1-a, a)
    K0(x, y) = -C_gamma d**(-gamma) I_w(a, 1-a)
             = -C_gamma Q**(-a) 2F1(a, a; a+1; w) / (a B(a, 1-a))

where ``I`` is the regularised incomplete beta function.  The hypergeometric
form is analytic across the diagonal ``w = 0`` and is used for ``w <= 1/2``.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np
from scipy import special as sc

from .errors import DomainError, SingularityError
from .special import GammaParam

__all__ = [
    "GreenKernel",
    "DiscKernel",
    "FreeSpaceKernel",
    "disc",
    "free_space",
    "make_kernel",
    "k1",
    "disc_green",
]

_HYP_SWITCH = 0.5


def _as_points(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1:] != (2,):
        raise DomainError(f"points must have a trailing axis of length 2, got shape {arr.shape}")
    return arr


def k1(x, y, gamma: float) -> np.ndarray:
    """Singular interaction ``C_gamma |x - y|**(-gamma)``.

    Parameters
    ----------
    x, y : array_like, shape (..., 2)
    gamma : float

    Returns
    -------
    numpy.ndarray or float

    Raises
    ------
    SingularityError
        If any pair of points coincides.
    """
    from .special import c_gamma

    x, y = _as_points(x), _as_points(y)
    d = np.hypot(*np.moveaxis(x - y, -1, 0))
    if np.any(d == 0.0):
        raise SingularityError("k1 evaluated at coincident points")
    out = c_gamma(gamma) * d ** (-float(gamma))
    return out[()] if out.ndim == 0 else out


def _unit_disc_parts(x, y):
    """Return ``d^2``, ``P`` for the unit disc (no domain check)."""
    diff = x - y
    d2 = diff[..., 0] ** 2 + diff[..., 1] ** 2
    p = (1.0 - (x[..., 0] ** 2 + x[..., 1] ** 2)) * (1.0 - (y[..., 0] ** 2 + y[..., 1] ** 2))
    return d2, p


def disc_green(x, y, gamma: float) -> np.ndarray:
    """Green function of the restricted fractional Laplacian on the unit disc.

    Normalised so that ``disc_green(x, y) |x - y|**gamma -> C_gamma`` on the
    diagonal.

    Parameters
    ----------
    x, y : array_like, shape (..., 2)
        Points in the open unit disc.
    gamma : float
        ``1 < gamma < 2``.

    Returns
    -------
    numpy.ndarray or float
    """
    return DiscKernel(GammaParam(gamma)).green(x, y)


class GreenKernel(ABC):
    """Interface for a domain Green kernel ``K = K1 + K0``.

    Attributes
    ----------
    gamma_param : GammaParam
    domain_tag : str
        ``"disc"`` or ``"free"``.
    radius : float
        Length scale of the domain (disc radius; 1 for the plane).
    """

    domain_tag: str = ""

    def __init__(self, gamma_param: GammaParam, radius: float = 1.0):
        if not isinstance(gamma_param, GammaParam):
            gamma_param = GammaParam(float(gamma_param))
        self.gamma_param = gamma_param
        self.radius = float(radius)
        self.fd_step = 1e-4 * self.radius

    @property
    def gamma(self) -> float:
        return self.gamma_param.gamma

    def __repr__(self):
        return f"{type(self).__name__}(gamma={self.gamma}, radius={self.radius})"

    # -- geometry -----------------------------------------------------------
    @abstractmethod
    def contains(self, x) -> np.ndarray:
        """Boolean mask of points strictly inside the domain."""

    def boundary_distance(self, x) -> np.ndarray:
        """Distance from ``x`` to the boundary (``inf`` for the plane)."""
        x = _as_points(x)
        return np.full(x.shape[:-1], np.inf)

    def check_inside(self, *points) -> None:
        for p in points:
            if not np.all(self.contains(p)):
                raise DomainError(f"point(s) outside the domain of {self!r}")

    def symmetry_generators(self, centers) -> list[np.ndarray]:
        """Infinitesimal isometries of the domain acting on stacked centers.

        Parameters
        ----------
        centers : array_like, shape (m, 2)

        Returns
        -------
        list of numpy.ndarray
            Each entry has shape ``(m, 2)``; degenerate (near-zero) generators
            are omitted.
        """
        return []

    # -- kernels ------------------------------------------------------------
    def k1(self, x, y):
        """Singular part ``C_gamma |x - y|**(-gamma)``."""
        return k1(x, y, self.gamma)

    @abstractmethod
    def k0(self, x, y):
        """Smooth remainder ``K0(x, y)``; the diagonal ``x = y`` is allowed."""

    def green(self, x, y):
        """Full kernel ``K1 + K0``."""
        return self.k1(x, y) + self.k0(x, y)

    def grad_x_k0(self, x, y, method: str = "auto", h: float | None = None):
        """Gradient of ``K0`` in its first argument.

        Parameters
        ----------
        x, y : array_like, shape (..., 2)
        method : {"auto", "fd", "analytic"}
            ``"fd"`` uses central differences with step ``h`` and one
            Richardson extrapolation level; ``"analytic"`` is available for
            kernels that implement it; ``"auto"`` prefers the analytic form.
        h : float, optional
            Finite-difference step (default ``1e-4 * radius``).

        Returns
        -------
        numpy.ndarray, shape (..., 2)
        """
        if method == "analytic" or (method == "auto" and self._has_analytic_gradient):
            return self._grad_x_k0_analytic(x, y)
        if method not in ("auto", "fd"):
            raise ValueError(f"unknown gradient method {method!r}")
        return self._grad_x_k0_fd(x, y, self.fd_step if h is None else float(h))

    _has_analytic_gradient = False

    def _grad_x_k0_analytic(self, x, y):  # pragma: no cover - overridden
        raise NotImplementedError

    def _grad_x_k0_fd(self, x, y, h):
        x, y = _as_points(x), _as_points(y)
        out = np.empty(np.broadcast_shapes(x.shape, y.shape))

        def central(step, axis):
            e = np.zeros(2)
            e[axis] = step
            return (self.k0(x + e, y) - self.k0(x - e, y)) / (2.0 * step)

        for axis in (0, 1):
            coarse = central(h, axis)
            fine = central(0.5 * h, axis)
            out[..., axis] = fine + (fine - coarse) / 3.0
        return out


class FreeSpaceKernel(GreenKernel):
    """The whole plane: ``K0 = 0``."""

    domain_tag = "free"
    _has_analytic_gradient = True

    def contains(self, x):
        x = _as_points(x)
        return np.isfinite(x).all(axis=-1)

    def k0(self, x, y):
        x, y = _as_points(x), _as_points(y)
        out = np.zeros(np.broadcast_shapes(x.shape[:-1], y.shape[:-1]))
        return out[()] if out.ndim == 0 else out

    def _grad_x_k0_analytic(self, x, y):
        x, y = _as_points(x), _as_points(y)
        return np.zeros(np.broadcast_shapes(x.shape, y.shape))

    def symmetry_generators(self, centers):
        c = np.asarray(centers, dtype=float)
        gens = []
        for axis in (0, 1):
            t = np.zeros_like(c)
            t[:, axis] = 1.0
            gens.append(t)
        rot = np.stack([-c[:, 1], c[:, 0]], axis=-1)
        if np.linalg.norm(rot) > 1e-12:
            gens.append(rot)
        return gens


class DiscKernel(GreenKernel):
    """Restricted fractional Laplacian on the disc ``|x| < radius``."""

    domain_tag = "disc"
    _has_analytic_gradient = True

    def __init__(self, gamma_param: GammaParam, radius: float = 1.0):
        super().__init__(gamma_param, radius)
        if self.radius <= 0:
            raise DomainError("disc radius must be positive")
        a = 0.5 * self.gamma
        self._a = a
        self._beta = math.pi / math.sin(math.pi * a)  # B(a, 1-a)
        self._scale = self.radius ** (-self.gamma)

    def contains(self, x):
        x = _as_points(x)
        return x[..., 0] ** 2 + x[..., 1] ** 2 < self.radius ** 2

    def boundary_distance(self, x):
        x = _as_points(x)
        return self.radius - np.hypot(x[..., 0], x[..., 1])

    def symmetry_generators(self, centers):
        c = np.asarray(centers, dtype=float)
        rot = np.stack([-c[:, 1], c[:, 0]], axis=-1)
        return [rot] if np.linalg.norm(rot) > 1e-12 * self.radius else []

    def _scaled(self, x, y, check=True):
        x, y = _as_points(x), _as_points(y)
        if check:
            self.check_inside(x, y)
        return x / self.radius, y / self.radius

    def green(self, x, y):
        """Full Green function ``C_gamma d**(-gamma) I_{1-w}(s, 1-s)``."""
        xs, ys = self._scaled(x, y)
        d2, p = _unit_disc_parts(xs, ys)
        if np.any(d2 == 0.0):
            raise SingularityError("disc Green function evaluated at coincident points")
        a = self._a
        c = self.gamma_param.c_gamma
        out = self._scale * c * d2 ** (-a) * sc.betainc(1.0 - a, a, p / (d2 + p))
        return out[()] if out.ndim == 0 else out

    def k0(self, x, y):
        xs, ys = self._scaled(x, y)
        d2, p = _unit_disc_parts(xs, ys)
        out = self._scale * self._k0_unit(d2, p)
        return out[()] if out.ndim == 0 else out

    def _k0_unit(self, d2, p):
        a = self._a
        c = self.gamma_param.c_gamma
        q = d2 + p
        w = d2 / q
        out = np.empty(np.shape(w))
        small = w <= _HYP_SWITCH
        if np.any(small):
            ws = w[small]
            out[small] = -c * q[small] ** (-a) * sc.hyp2f1(a, a, a + 1.0, ws) / (a * self._beta)
        big = ~small
        if np.any(big):
            out[big] = -c * d2[big] ** (-a) * sc.betainc(a, 1.0 - a, w[big])
        return out

    def _f_and_fprime(self, w):
        """``F(w) = I_w(a,1-a)/w**a`` and its derivative, both finite at ``w = 0``."""
        a, bab = self._a, self._beta
        f = np.empty(np.shape(w))
        fp = np.empty(np.shape(w))
        small = w <= _HYP_SWITCH
        if np.any(small):
            ws = w[small]
            f[small] = sc.hyp2f1(a, a, a + 1.0, ws) / (a * bab)
            fp[small] = a / ((a + 1.0) * bab) * sc.hyp2f1(a + 1.0, a + 1.0, a + 2.0, ws)
        big = ~small
        if np.any(big):
            wb = w[big]
            fb = sc.betainc(a, 1.0 - a, wb) * wb ** (-a)
            f[big] = fb
            fp[big] = ((1.0 - wb) ** (-a) / bab - a * fb) / wb
        return f, fp

    def _grad_x_k0_analytic(self, x, y):
        xs, ys = self._scaled(x, y)
        a = self._a
        c = self.gamma_param.c_gamma
        diff = xs - ys
        d2 = diff[..., 0] ** 2 + diff[..., 1] ** 2
        ny = 1.0 - (ys[..., 0] ** 2 + ys[..., 1] ** 2)
        p = (1.0 - (xs[..., 0] ** 2 + xs[..., 1] ** 2)) * ny
        q = d2 + p
        w = d2 / q
        f, fp = self._f_and_fprime(w)
        grad_q = 2.0 * diff - 2.0 * xs * ny[..., None]
        grad_w = (2.0 * diff - w[..., None] * grad_q) / q[..., None]
        qa = q ** (-a)
        grad = -c * (-a * (qa / q * f)[..., None] * grad_q + (qa * fp)[..., None] * grad_w)
        return grad * (self._scale / self.radius)


def disc(radius: float, gamma: float) -> DiscKernel:
    """Disc kernel of the given radius."""
    return DiscKernel(GammaParam(gamma), radius)


def free_space(gamma: float) -> FreeSpaceKernel:
    """Whole-plane kernel (``K0 = 0``)."""
    return FreeSpaceKernel(GammaParam(gamma))


def make_kernel(domain: str, gamma: float, radius: float = 1.0) -> GreenKernel:
    """Build a kernel from a domain tag (``"disc"`` or ``"free"``)."""
    if domain == "disc":
        return disc(radius, gamma)
    if domain in ("free", "free_space"):
        return free_space(gamma)
    raise DomainError(f"unknown domain {domain!r}")
