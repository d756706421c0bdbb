"""Fourier description of patch boundaries.

A patch boundary is the polar curve ``z(b) = x + eps R(b) (cos b, sin b)`` with
``R = rho + eps|eps|**gamma g(b)`` and a shape function ``g`` that only carries
the modes ``j >= 2`` (no mean, no translation modes).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, GeometryError, InfeasibleFluxError
from .special import cos_diff_multiplier

__all__ = [
    "FourierContour",
    "PatchGeometry",
    "shape_scale",
    "uniform_grid",
    "basis",
    "radius",
    "boundary_point",
    "flux_residual",
    "rho_of",
    "drho_dcoeffs",
    "norm_X",
    "norm_Y",
    "norm_X_exact",
    "signed_curvature",
    "project_modes",
    "synthesize",
    "enclosed_area",
    "centroid",
]


def shape_scale(eps: float, gamma: float) -> float:
    """Amplitude factor ``eps |eps|**gamma`` multiplying the shape function."""
    return float(eps) * abs(float(eps)) ** float(gamma)


def uniform_grid(m: int) -> np.ndarray:
    """Collocation grid ``2 pi i / m``, ``i = 0..m-1``."""
    return 2.0 * np.pi * np.arange(m) / m


@lru_cache(maxsize=64)
def _cached_basis(n: int, m: int):
    beta = uniform_grid(m)
    j = np.arange(2, n + 1)
    c = np.cos(np.outer(beta, j))
    s = np.sin(np.outer(beta, j))
    c.setflags(write=False)
    s.setflags(write=False)
    return c, s


def basis(n: int, beta) -> tuple[np.ndarray, np.ndarray]:
    """Matrices ``cos(j b)``, ``sin(j b)`` for ``j = 2..n`` (rows: ``b``)."""
    beta = np.asarray(beta, dtype=float)
    j = np.arange(2, n + 1)
    arg = np.multiply.outer(beta, j)
    return np.cos(arg), np.sin(arg)


@dataclass(frozen=True)
class FourierContour:
    """Shape function ``g(b) = sum_{j=2}^N a_j cos(j b) + b_j sin(j b)``.

    Attributes
    ----------
    a, b : numpy.ndarray
        Coefficients of modes ``2..N`` (index 0 is mode 2).
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float).reshape(-1)
        b = np.array(self.b, dtype=float).reshape(-1)
        if a.shape != b.shape:
            raise DomainError("cosine and sine coefficient arrays differ in length")
        if a.size < 1:
            raise DomainError("a contour needs at least the j=2 mode")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    # -- construction -------------------------------------------------------
    @classmethod
    def zeros(cls, n: int) -> "FourierContour":
        """The circle ``g = 0`` truncated at order ``n``."""
        if n < 2:
            raise DomainError("truncation order must be >= 2")
        return cls(np.zeros(n - 1), np.zeros(n - 1))

    @classmethod
    def from_modes(cls, n: int, cos=None, sin=None) -> "FourierContour":
        """Build from ``{j: value}`` dictionaries of cosine/sine coefficients."""
        a = np.zeros(n - 1)
        b = np.zeros(n - 1)
        for arr, modes in ((a, cos or {}), (b, sin or {})):
            for j, v in modes.items():
                if not 2 <= j <= n:
                    raise DomainError(f"mode {j} outside 2..{n}")
                arr[j - 2] = v
        return cls(a, b)

    @classmethod
    def from_vector(cls, vec) -> "FourierContour":
        """Inverse of :attr:`vector`."""
        vec = np.asarray(vec, dtype=float)
        half = vec.size // 2
        return cls(vec[:half], vec[half:])

    # -- properties ---------------------------------------------------------
    @property
    def n(self) -> int:
        """Truncation order ``N``."""
        return self.a.size + 1

    @property
    def modes(self) -> np.ndarray:
        return np.arange(2, self.n + 1)

    @property
    def vector(self) -> np.ndarray:
        """Concatenation ``(a_2..a_N, b_2..b_N)``."""
        return np.concatenate([self.a, self.b])

    def square_integral(self) -> float:
        """``int_0^{2pi} g^2`` by Parseval."""
        return float(np.pi * (np.sum(self.a ** 2) + np.sum(self.b ** 2)))

    def evaluate(self, beta, derivative: int = 0) -> np.ndarray:
        """Values of ``g`` (or its ``derivative``-th derivative) at ``beta``."""
        beta = np.asarray(beta, dtype=float)
        j = self.modes
        arg = np.multiply.outer(beta, j)
        ca, sb = self.a, self.b
        # d^k/db^k [a cos + b sin] = j^k [a cos(. + k pi/2) + b sin(. + k pi/2)]
        phase = 0.5 * np.pi * derivative
        jk = j.astype(float) ** derivative
        return (np.cos(arg + phase) * (ca * jk) + np.sin(arg + phase) * (sb * jk)).sum(axis=-1)

    def rotated(self, phi: float) -> "FourierContour":
        """Shape of the patch rotated by ``phi``: ``g(b - phi)``."""
        j = self.modes
        c, s = np.cos(j * phi), np.sin(j * phi)
        return FourierContour(self.a * c - self.b * s, self.a * s + self.b * c)

    def truncated(self, n: int) -> "FourierContour":
        """Truncate or zero-pad to order ``n``."""
        a = np.zeros(n - 1)
        b = np.zeros(n - 1)
        k = min(n, self.n) - 1
        a[:k] = self.a[:k]
        b[:k] = self.b[:k]
        return FourierContour(a, b)

    def __add__(self, other: "FourierContour") -> "FourierContour":
        return FourierContour(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "FourierContour") -> "FourierContour":
        return FourierContour(self.a - other.a, self.b - other.b)

    def __mul__(self, c: float) -> "FourierContour":
        return FourierContour(c * self.a, c * self.b)

    __rmul__ = __mul__


@dataclass(frozen=True)
class PatchGeometry:
    """One patch: center, base radius, size parameter and shape.

    Attributes
    ----------
    center : numpy.ndarray, shape (2,)
    rho : float
    eps : float
    shape : FourierContour
    gamma : float
    """

    center: np.ndarray
    rho: float
    eps: float
    shape: FourierContour
    gamma: float
    delta: float = field(init=False)

    def __post_init__(self):
        c = np.array(self.center, dtype=float).reshape(2)
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "delta", shape_scale(self.eps, self.gamma))
        if self.rho <= 0:
            raise GeometryError(f"base radius must be positive, got {self.rho}")

    def with_shape(self, shape: FourierContour) -> "PatchGeometry":
        return PatchGeometry(self.center, self.rho, self.eps, shape, self.gamma)


def radius(geom: PatchGeometry, beta, derivative: int = 0) -> np.ndarray:
    """``R(b) = rho + eps|eps|^gamma g(b)`` or one of its derivatives."""
    g = geom.shape.evaluate(beta, derivative)
    return (geom.rho if derivative == 0 else 0.0) + geom.delta * g


def boundary_point(geom: PatchGeometry, beta) -> np.ndarray:
    """``z(b) = x + eps R(b) (cos b, sin b)``; trailing axis of length 2."""
    beta = np.asarray(beta, dtype=float)
    r = radius(geom, beta)
    e = np.stack([np.cos(beta), np.sin(beta)], axis=-1)
    return geom.center + geom.eps * r[..., None] * e


def flux_residual(geom: PatchGeometry, kappa: float) -> float:
    """``pi rho^2 + eps^{2+2 gamma}/2 int g^2 - kappa`` (Parseval for the integral)."""
    e = abs(geom.eps) ** (2.0 + 2.0 * geom.gamma)
    return float(np.pi * geom.rho ** 2 + 0.5 * e * geom.shape.square_integral() - kappa)


def rho_of(eps: float, g: FourierContour, kappa: float, gamma: float) -> float:
    """Base radius that makes the flux exactly ``kappa``.

    Returns ``sqrt(kappa/pi - eps^{2+2 gamma}/(2 pi) int g^2)``.

    Raises
    ------
    InfeasibleFluxError
        If the radicand is not positive.
    """
    if kappa <= 0:
        raise DomainError("kappa must be positive")
    e = abs(float(eps)) ** (2.0 + 2.0 * float(gamma))
    rad = kappa / np.pi - e * g.square_integral() / (2.0 * np.pi)
    if not rad > 0:
        raise InfeasibleFluxError(f"flux constraint infeasible: rho^2 = {rad:g}")
    return float(np.sqrt(rad))


def drho_dcoeffs(eps: float, g: FourierContour, rho: float, gamma: float) -> np.ndarray:
    """Derivative of :func:`rho_of` with respect to ``g.vector``."""
    e = abs(float(eps)) ** (2.0 + 2.0 * float(gamma))
    return -e * g.vector / (2.0 * rho)


def norm_Y(g: FourierContour, k: int = 3) -> float:
    """Sobolev norm ``(sum (1+j^2)^k (a_j^2 + b_j^2))^{1/2}``."""
    w = (1.0 + g.modes.astype(float) ** 2) ** k
    return float(np.sqrt(np.sum(w * (g.a ** 2 + g.b ** 2))))


def norm_X(g: FourierContour, k: int = 3, gamma: float = 1.5) -> float:
    """Weighted norm ``(sum (1+j^2)^{k+gamma-1} (a_j^2 + b_j^2))^{1/2}``.

    Equivalent on truncations to the norm with the singular difference
    integral; see :func:`norm_X_exact`.
    """
    w = (1.0 + g.modes.astype(float) ** 2) ** (k + gamma - 1.0)
    return float(np.sqrt(np.sum(w * (g.a ** 2 + g.b ** 2))))


def norm_X_exact(g: FourierContour, k: int = 3, gamma: float = 1.5) -> float:
    """Norm with the singular difference term evaluated by exact multipliers.

    ``sum [(1+j^2)^k + (2 pi m_j j^k)^2] (a_j^2 + b_j^2)``, where ``m_j`` is
    :func:`~gsqg_patches.special.cos_diff_multiplier`.
    """
    j = g.modes.astype(float)
    m = np.array([cos_diff_multiplier(int(jj), gamma) for jj in j])
    w = (1.0 + j ** 2) ** k + (2.0 * np.pi * m * j ** k) ** 2
    return float(np.sqrt(np.sum(w * (g.a ** 2 + g.b ** 2))))


def signed_curvature(geom: PatchGeometry, beta) -> np.ndarray:
    """Signed curvature of the polar boundary.

    ``eps C = (R^2 + 2 (d g')^2 - d g'' R) / (R^2 + (d g')^2)^{3/2}`` with
    ``d = eps|eps|^gamma``; returns ``C``.
    """
    r = radius(geom, beta)
    r1 = geom.delta * geom.shape.evaluate(beta, 1)
    r2 = geom.delta * geom.shape.evaluate(beta, 2)
    num = r ** 2 + 2.0 * r1 ** 2 - r2 * r
    return num / (r ** 2 + r1 ** 2) ** 1.5 / geom.eps


def project_modes(samples, n: int):
    """Split uniform-grid samples into mean, first harmonics and the ``j >= 2`` part.

    Parameters
    ----------
    samples : array_like, shape (M,)
        Values on ``2 pi i / M``.
    n : int
        Truncation order of the returned contour; requires ``M >= 2n + 2``.

    Returns
    -------
    c0 : float
        Mean value.
    c1_cos, c1_sin : float
        Coefficients of ``cos b`` and ``sin b``.
    contour : FourierContour
        Modes ``2..n``.
    """
    f = np.asarray(samples, dtype=float)
    m = f.size
    if m < 2 * n + 2:
        raise DomainError(f"grid of {m} points aliases modes up to {n}")
    spec = np.fft.rfft(f) / m
    c0 = float(spec[0].real)
    a = 2.0 * spec[1 : n + 1].real
    b = -2.0 * spec[1 : n + 1].imag
    return c0, float(a[0]), float(b[0]), FourierContour(a[1:], b[1:])


def synthesize(g: FourierContour, m: int) -> np.ndarray:
    """Values of ``g`` on the uniform grid of ``m`` points (inverse of :func:`project_modes`)."""
    if m < 2 * g.n + 2:
        raise DomainError(f"grid of {m} points aliases modes up to {g.n}")
    c, s = _cached_basis(g.n, m)
    return c @ g.a + s @ g.b


def _boundary_derivatives(geom: PatchGeometry, m: int):
    beta = uniform_grid(m)
    r = radius(geom, beta)
    r1 = geom.delta * geom.shape.evaluate(beta, 1)
    cb, sb = np.cos(beta), np.sin(beta)
    # coordinates relative to the nominal center (translation-invariant formulas)
    x = geom.eps * r * cb
    y = geom.eps * r * sb
    dx = geom.eps * (r1 * cb - r * sb)
    dy = geom.eps * (r1 * sb + r * cb)
    return x, y, dx, dy


def enclosed_area(geom: PatchGeometry, m: int = 512) -> float:
    """Area ``(1/2) oint (x dy - y dx)`` by the trapezoid rule on ``m`` boundary samples."""
    x, y, dx, dy = _boundary_derivatives(geom, m)
    return float(0.5 * np.sum(x * dy - y * dx) * 2.0 * np.pi / m)


def centroid(geom: PatchGeometry, m: int = 512) -> np.ndarray:
    """Area centroid from boundary samples via Green's theorem."""
    x, y, dx, dy = _boundary_derivatives(geom, m)
    h = 2.0 * np.pi / m
    area = 0.5 * np.sum(x * dy - y * dx) * h
    cx = 0.5 * np.sum(x ** 2 * dy) * h / area
    cy = -0.5 * np.sum(y ** 2 * dx) * h / area
    return geom.center + np.array([cx, cy])
