"""Gamma-function machinery, the kernel constant and the Fourier multipliers.

The multipliers ``sigma_j`` diagonalise the linearised self-interaction of a
circular patch: at zero patch size the map ``g -> dG/dg h`` sends
``cos(j b)`` to ``sigma_j * j / rho**gamma * sin(j b)``.  Everything here is a
pure function of its arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special as sc

from .errors import DomainError, PoleError

__all__ = [
    "GammaParam",
    "SigmaSpectrum",
    "gamma_fn",
    "c_gamma",
    "sigma",
    "sigma_spectrum",
    "trig_moment",
    "cos_diff_multiplier",
    "half_angle_moments",
]


def _is_nonpositive_integer(z: float) -> bool:
    return z <= 0 and float(z).is_integer()


def gamma_fn(z: float) -> float:
    """Euler Gamma function with an explicit error at the poles.

    Parameters
    ----------
    z : float
        Real argument, not a nonpositive integer.

    Returns
    -------
    float

    Raises
    ------
    PoleError
        If ``z`` is ``0, -1, -2, ...``.
    """
    z = float(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"Gamma has a pole at z={z:g}")
    return float(sc.gamma(z))


@dataclass(frozen=True)
class GammaParam:
    """The exponent ``gamma`` together with its derived constants.

    Attributes
    ----------
    gamma : float
        Exponent of the velocity kernel, ``1 < gamma < 2``.
    c_gamma : float
        Kernel constant ``2**(gamma-1) Gamma(gamma/2) / Gamma(1-gamma/2)``.
    s : float
        Order of the inverse fractional Laplacian, ``1 - gamma/2``.
    """

    gamma: float
    c_gamma: float = field(init=False)
    s: float = field(init=False)

    def __post_init__(self):
        g = float(self.gamma)
        if not (1.0 < g < 2.0):
            raise DomainError(f"gamma must satisfy 1 < gamma < 2, got {g!r}")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "c_gamma", c_gamma(g))
        object.__setattr__(self, "s", 1.0 - 0.5 * g)


def c_gamma(gamma: float) -> float:
    """Kernel constant ``C_gamma = 2**(gamma-1) Gamma(gamma/2)/Gamma(1-gamma/2)``.

    Parameters
    ----------
    gamma : float
        ``0 < gamma < 2``.

    Returns
    -------
    float
    """
    g = float(gamma)
    if not (0.0 < g < 2.0):
        raise DomainError(f"c_gamma requires 0 < gamma < 2, got {g!r}")
    return 2.0 ** (g - 1.0) * gamma_fn(0.5 * g) / gamma_fn(1.0 - 0.5 * g)


def _check_solver_gamma(gamma: float) -> float:
    g = float(gamma)
    if not (1.0 < g < 2.0):
        raise DomainError(f"gamma must satisfy 1 < gamma < 2, got {g!r}")
    return g


def sigma(j: int, gamma: float) -> float:
    """Multiplier ``sigma_j`` of the linearised self-interaction.

    ``sigma_1 = 0``; for ``j >= 2``::

        sigma_j = 2**(gamma-1) Gamma(1-gamma) / Gamma(1-gamma/2)**2
                  * (Gamma(1+gamma/2)/Gamma(2-gamma/2) - Gamma(j+gamma/2)/Gamma(1+j-gamma/2))

    The second Gamma ratio is evaluated as a Pochhammer symbol so that large
    ``j`` does not overflow.

    Parameters
    ----------
    j : int
        Mode number, ``j >= 1``.
    gamma : float
        ``1 < gamma < 2``.

    Returns
    -------
    float
    """
    g = _check_solver_gamma(gamma)
    j = int(j)
    if j < 1:
        raise DomainError(f"sigma requires j >= 1, got {j}")
    if j == 1:
        return 0.0
    a = 0.5 * g
    pref = 2.0 ** (g - 1.0) * gamma_fn(1.0 - g) / gamma_fn(1.0 - a) ** 2
    ratio_1 = gamma_fn(1.0 + a) / gamma_fn(2.0 - a)
    ratio_j = float(sc.poch(1.0 + j - a, g - 1.0))
    return pref * (ratio_1 - ratio_j)


@dataclass(frozen=True)
class SigmaSpectrum:
    """Tabulated multipliers ``sigma_1 .. sigma_N`` for one exponent.

    Attributes
    ----------
    gamma : float
    values : numpy.ndarray
        Read-only array, ``values[j-1] = sigma_j``.
    """

    gamma: float
    values: np.ndarray

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def __getitem__(self, j: int) -> float:
        if j < 1 or j > self.n:
            raise IndexError(f"mode {j} outside 1..{self.n}")
        return float(self.values[j - 1])

    def eigenvalues(self, rho: float = 1.0) -> np.ndarray:
        """Return ``sigma_j * j / rho**gamma`` for ``j = 1..N``."""
        j = np.arange(1, self.n + 1)
        return self.values * j / rho ** self.gamma


@lru_cache(maxsize=64)
def _sigma_table(n: int, gamma: float) -> np.ndarray:
    vals = np.array([sigma(j, gamma) for j in range(1, n + 1)])
    vals.setflags(write=False)
    return vals


def sigma_spectrum(n: int, gamma: float) -> SigmaSpectrum:
    """Cached table of ``sigma_1 .. sigma_n``.

    Parameters
    ----------
    n : int
        Largest mode, ``n >= 1``.
    gamma : float

    Returns
    -------
    SigmaSpectrum
    """
    g = _check_solver_gamma(gamma)
    if int(n) < 1:
        raise DomainError("sigma_spectrum needs n >= 1")
    return SigmaSpectrum(gamma=g, values=_sigma_table(int(n), g))


def trig_moment(j: float, gamma: float) -> complex:
    """Closed-form singular moment ``pi e^{i j pi} Gamma(3-gamma) / (2^{2-gamma} Gamma(2+j-gamma/2) Gamma(2-j-gamma/2))``.

    The closed form equals ``int_0^pi sin(t)**(2-gamma) exp(2 i j t) dt``,
    i.e. the moment at frequency ``2j`` (see the decisions ledger).  With
    ``t = eta/2`` this is the quantity that enters the half-angle kernel
    ``|2 sin(eta/2)|**(2-gamma)`` at frequency ``j``.

    Parameters
    ----------
    j : float
        Real frequency parameter; integer values use a reflected formula that
        is stable for large ``|j|``.
    gamma : float
        ``gamma < 3``.

    Returns
    -------
    complex

    Raises
    ------
    PoleError
        If ``2 + j - gamma/2`` or ``2 - j - gamma/2`` is a nonpositive integer.
    """
    g = float(gamma)
    if not g < 3.0:
        raise DomainError(f"trig_moment requires gamma < 3, got {g!r}")
    j = float(j)
    a = 0.5 * g
    for arg in (2.0 + j - a, 2.0 - j - a):
        if _is_nonpositive_integer(arg):
            raise PoleError(f"Gamma pole at argument {arg:g} (j={j:g}, gamma={g:g})")
    base = math.pi * sc.gamma(3.0 - g) / 2.0 ** (2.0 - g)
    if j.is_integer():
        n = abs(int(j))
        if n + a - 1.0 > 0.0:
            # 1/(Gamma(2+n-a) Gamma(2-n-a)) = (-1)^n sin(pi(2-a)) / (pi poch(n+a-1, 3-2a))
            val = (-1.0) ** n * math.sin(math.pi * (2.0 - a)) / (math.pi * sc.poch(n + a - 1.0, 3.0 - g))
            return complex((-1.0) ** n * base * val, 0.0)
        return complex((-1.0) ** n * base * sc.rgamma(2.0 + n - a) * sc.rgamma(2.0 - n - a), 0.0)
    x1, x2 = 2.0 + j - a, 2.0 - j - a
    mag = np.exp(-sc.gammaln(x1) - sc.gammaln(x2)) * sc.gammasgn(x1) * sc.gammasgn(x2)
    return complex(np.exp(1j * math.pi * j) * base * mag)


def half_angle_moments(n_max: int, gamma: float) -> np.ndarray:
    """Moments ``mu_n = int_0^{2 pi} cos(n eta) |2 sin(eta/2)|**(2-gamma) d eta``.

    Parameters
    ----------
    n_max : int
        Highest frequency.
    gamma : float

    Returns
    -------
    numpy.ndarray
        ``mu_0 .. mu_{n_max}``.
    """
    g = float(gamma)
    scale = 2.0 ** (3.0 - g)
    return np.array([scale * trig_moment(n, g).real for n in range(int(n_max) + 1)])


def cos_diff_multiplier(j: int, gamma: float) -> float:
    """Multiplier of the singular difference convolution.

    Returns ``m_j`` with
    ``(1/2pi) int_0^{2pi} (h(b) - h(b - eta)) |sin(eta/2)|**(-gamma) d eta = m_j h(b)``
    for ``h = cos(j b)`` or ``sin(j b)``::

        m_j = 2**gamma Gamma(1-gamma) / (Gamma(gamma/2) Gamma(1-gamma/2))
              * (Gamma(gamma/2)/Gamma(1-gamma/2) - Gamma(j+gamma/2)/Gamma(1+j-gamma/2))

    Parameters
    ----------
    j : int
        ``j >= 0``.
    gamma : float
        ``1 < gamma < 2``.

    Returns
    -------
    float
    """
    g = _check_solver_gamma(gamma)
    j = int(j)
    if j < 0:
        raise DomainError("cos_diff_multiplier requires j >= 0")
    if j == 0:
        return 0.0
    a = 0.5 * g
    pref = 2.0 ** g * gamma_fn(1.0 - g) / (gamma_fn(a) * gamma_fn(1.0 - a))
    return pref * (gamma_fn(a) / gamma_fn(1.0 - a) - float(sc.poch(1.0 + j - a, g - 1.0)))
