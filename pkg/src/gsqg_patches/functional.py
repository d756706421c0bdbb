"""The contour-dynamics functional ``G_i = G_{i,1} + G_{i,2} + G_{i,3}``.

For a configuration of ``m`` nearly circular patches
``z_i(b) = x_i + eps R_i(b) (cos b, sin b)``, ``R_i = rho_i + d g_i`` with
``d = eps|eps|**gamma``, the three terms are

* ``G_{i,1}``: self-induced normal velocity (a singular integral in ``eta``);
* ``G_{i,2}``: interaction with the other patches (smooth integrand);
* ``G_{i,3}``: influence of the domain boundary through ``grad_x K0``.

Numerical strategy
------------------
``G_{i,1}``
    The integrand is rewritten without the ``1/d`` cancellation: with
    ``eta = b - eta'`` and ``u = d v`` the relative perturbation of the
    denominator,

        ``G_{i,1} = C/(2 pi R(b)) int A(eta')**(-gamma/2) F d eta'``,
        ``F = rho**(2-gamma) sin(eta') [(1+u)**(-gamma/2) - 1]/d
              + rho**(-gamma) N_1 (1+u)**(-gamma/2)``

    (``N_1`` collects the ``O(d)`` part of the numerator; the ``O(1)`` part
    integrates to zero exactly).  ``expm1``/``log1p`` keep ``F`` accurate for
    any ``d >= 0``.  The ``eta'`` integral uses the product rule of
    :func:`~gsqg_patches.quadrature.periodic_singular_rule` (spectral) or the
    graded Gauss-Legendre rule; ``g(b - eta')`` comes from the addition
    theorem so every collocation point shares one set of ``eta'`` nodes.
    At ``eps = 0`` the term is evaluated from the closed-form multipliers.
``G_{i,2}``
    The same cancellation-free split with ``E = [(1+eps b)**(-gamma/2)-1]/eps``
    and the trapezoid rule in ``eta``.
``G_{i,3}``
    ``V(z) = sum_j int int grad_x K0(z, x_j + eps t e_eta) t dt d eta`` is split
    into the disc ``t < rho_j`` (trapezoid x Gauss-Legendre) plus the thin
    sliver ``rho_j < t < R_j(eta)``.  Then
    ``G_{i,3} = -c (e_perp + (d g'/R) e) . V(z_i(b))`` with the normalisation
    ``c`` selectable (see :class:`QuadratureConfig`).

All integrand kernels accept complex input so that partial derivatives can be
taken by the complex-step method (see :mod:`gsqg_patches.linop`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .contour import PatchGeometry, radius, uniform_grid
from .errors import DomainError, GeometryError, SingularityError
from .green import GreenKernel
from .quadrature import graded_rule, periodic_singular_rule
from .special import GammaParam, sigma_spectrum

__all__ = [
    "QuadratureConfig",
    "FunctionalContext",
    "KernelParts",
    "kernel_parts",
    "eval_G1",
    "eval_G2",
    "eval_G3",
    "eval_G",
    "eval_terms",
    "gateaux_G1",
    "gateaux_formula",
    "limit_G1",
    "limit_G2",
    "limit_G3",
    "g3_field",
]

_CSTEP = 1e-20


# ---------------------------------------------------------------------------
# configuration and context
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class QuadratureConfig:
    """Discretisation parameters of the functional.

    Attributes
    ----------
    n_grid : int or None
        Number of collocation points ``M`` (default ``4 N``).
    eta_factor : int
        The ``eta`` grids carry ``eta_factor * M`` points.
    g1_method : {"spectral", "graded"}
        Rule for the singular ``eta'`` integral of ``G_{i,1}``.
    graded_levels, graded_ratio, graded_nodes : int, float, int
        Parameters of the graded Gauss-Legendre rule.
    radial_nodes : int
        Gauss-Legendre nodes in ``t`` on the disc part of ``G_{i,3}``.
    core_eta : int
        Trapezoid nodes in ``eta`` on the disc part of ``G_{i,3}``.
    sliver_nodes : int
        Gauss-Legendre nodes across the sliver ``rho_j < t < R_j(eta)``.
    g3_coupling : {"self", "all"}
        Source patches of ``G_{i,3}``: only patch ``i`` or all patches.
    g3_normalization : {"consistent", "printed"}
        ``"consistent"`` multiplies the printed ``G_{i,3}`` by ``1/(2 pi)``,
        matching the ``1/(2 pi)`` in front of ``G_{i,1}`` and ``G_{i,2}``.
    g2_variant : {"R", "verbatim"}
        ``"R"`` uses ``R_j(eta)`` in the ``G_{i,2}`` numerator, ``"verbatim"``
        the constant ``rho_j`` (so the ``R_j'`` terms vanish).
    grad_method : {"auto", "fd", "analytic"}
        Passed to :meth:`GreenKernel.grad_x_k0`.
    """

    n_grid: int | None = None
    eta_factor: int = 1
    g1_method: str = "spectral"
    graded_levels: int = 12
    graded_ratio: float = 0.5
    graded_nodes: int = 8
    radial_nodes: int = 16
    core_eta: int = 32
    sliver_nodes: int = 2
    g3_coupling: str = "self"
    g3_normalization: str = "consistent"
    g2_variant: str = "R"
    grad_method: str = "auto"

    def __post_init__(self):
        choices = {
            "g1_method": ("spectral", "graded"),
            "g3_coupling": ("self", "all"),
            "g3_normalization": ("consistent", "printed"),
            "g2_variant": ("R", "verbatim"),
            "grad_method": ("auto", "fd", "analytic"),
        }
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise DomainError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")
        if self.eta_factor < 1 or self.radial_nodes < 1 or self.core_eta < 4 or self.sliver_nodes < 1:
            raise DomainError("quadrature node counts must be positive")

    def grid_size(self, n: int) -> int:
        """Collocation grid size for truncation order ``n``."""
        m = int(self.n_grid) if self.n_grid else 4 * int(n)
        if m < 2 * n + 2 or m % 2:
            raise DomainError(f"collocation grid of {m} points is too coarse (or odd) for N={n}")
        return m

    def refined(self) -> "QuadratureConfig":
        """Configuration with doubled ``eta`` grids and graded levels."""
        from dataclasses import replace

        return replace(
            self,
            eta_factor=2 * self.eta_factor,
            graded_levels=2 * self.graded_levels,
            core_eta=2 * self.core_eta,
            radial_nodes=2 * self.radial_nodes,
        )

    @property
    def g3_scale(self) -> float:
        return 1.0 / (2.0 * np.pi) if self.g3_normalization == "consistent" else 1.0


@dataclass(frozen=True)
class KernelParts:
    """Bookkeeping quantities of the integrands.

    Attributes
    ----------
    A : numpy.ndarray
        ``4 sin^2((b - eta)/2)``.
    B : numpy.ndarray
        Self-interaction perturbation ``B(rho_i, g_i, b, eta)``.
    A_ij : float
        ``|x_i - x_j|^2`` (``nan`` when ``i == j``).
    B_ij : numpy.ndarray
        Interaction perturbation (``nan`` when ``i == j``).
    """

    A: np.ndarray
    B: np.ndarray
    A_ij: float
    B_ij: np.ndarray


@dataclass(frozen=True)
class FunctionalContext:
    """Everything needed to evaluate the functional.

    Attributes
    ----------
    kernel : GreenKernel
    geometries : tuple of PatchGeometry
        All patches share ``eps``, ``gamma`` and the truncation order.
    quad : QuadratureConfig
    """

    kernel: GreenKernel
    geometries: tuple
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    check: bool = True

    def __post_init__(self):
        geoms = tuple(self.geometries)
        object.__setattr__(self, "geometries", geoms)
        if not geoms:
            raise DomainError("at least one patch is required")
        g0 = geoms[0]
        for g in geoms:
            if not isinstance(g, PatchGeometry):
                raise DomainError("geometries must be PatchGeometry instances")
            if g.eps != g0.eps or g.gamma != g0.gamma or g.shape.n != g0.shape.n:
                raise DomainError("all patches must share eps, gamma and truncation order")
        if abs(g0.gamma - self.kernel.gamma) > 0.0:
            raise DomainError("patch gamma differs from the kernel gamma")
        if self.check:
            self.check_geometry()

    # -- basic properties ---------------------------------------------------
    @property
    def gamma_param(self) -> GammaParam:
        return self.kernel.gamma_param

    @property
    def gamma(self) -> float:
        return self.kernel.gamma

    @property
    def m(self) -> int:
        return len(self.geometries)

    @property
    def n(self) -> int:
        return self.geometries[0].shape.n

    @property
    def eps(self) -> float:
        return self.geometries[0].eps

    @property
    def delta(self) -> float:
        return self.geometries[0].delta

    @cached_property
    def m_grid(self) -> int:
        return self.quad.grid_size(self.n)

    @cached_property
    def beta(self) -> np.ndarray:
        return uniform_grid(self.m_grid)

    @cached_property
    def m_eta(self) -> int:
        return self.quad.eta_factor * self.m_grid

    def with_geometries(self, geometries, check: bool = True) -> "FunctionalContext":
        return FunctionalContext(self.kernel, tuple(geometries), self.quad, check)

    def sources(self, i: int) -> list[int]:
        """Indices of source patches of ``G_{i,3}``."""
        return [i] if self.quad.g3_coupling == "self" else list(range(self.m))

    # -- validation ---------------------------------------------------------
    def check_geometry(self) -> None:
        """Positivity of radii, containment and pairwise disjointness.

        Raises
        ------
        GeometryError
        """
        beta = self.beta
        rmax = []
        for k, g in enumerate(self.geometries):
            r = radius(g, beta)
            if not np.all(r > 0):
                raise GeometryError(f"patch {k}: radius function is not positive on the grid")
            rmax.append(float(np.max(r)) * abs(g.eps))
            if g.eps != 0.0:
                pts = g.center + g.eps * r[:, None] * np.stack([np.cos(beta), np.sin(beta)], axis=-1)
            else:
                pts = g.center[None, :]
            if not np.all(self.kernel.contains(pts)):
                raise GeometryError(f"patch {k} is not contained in the domain")
        for i in range(self.m):
            for j in range(i + 1, self.m):
                d = float(np.linalg.norm(self.geometries[i].center - self.geometries[j].center))
                if d == 0.0:
                    raise SingularityError(f"patches {i} and {j} share a center")
                if d <= rmax[i] + rmax[j]:
                    raise GeometryError(f"patches {i} and {j} may overlap (separation {d:g})")


# ---------------------------------------------------------------------------
# trigonometric helpers
# ---------------------------------------------------------------------------
@lru_cache(maxsize=128)
def _trig(n: int, key: tuple) -> tuple[np.ndarray, np.ndarray]:
    pts = np.array(key)
    j = np.arange(2, n + 1)
    arg = np.multiply.outer(pts, j)
    c, s = np.cos(arg), np.sin(arg)
    c.setflags(write=False)
    s.setflags(write=False)
    return c, s


def trig_matrices(n: int, points) -> tuple[np.ndarray, np.ndarray]:
    """Cached ``cos(j p)``, ``sin(j p)`` (``j = 2..n``) for a node array."""
    pts = np.asarray(points, dtype=float).reshape(-1)
    return _trig(int(n), tuple(pts.tolist()))


def shifted_values(a, b, cb, sb, cq, sq):
    """``g(b_i - eta'_q)`` from the addition theorem.

    Parameters
    ----------
    a, b : array_like, shape (K,)
        Cosine and sine coefficients.
    cb, sb : numpy.ndarray, shape (M, K)
        ``cos(j b_i)``, ``sin(j b_i)``.
    cq, sq : numpy.ndarray, shape (Q, K)
        ``cos(j eta'_q)``, ``sin(j eta'_q)``.

    Returns
    -------
    numpy.ndarray, shape (M, Q)
    """
    p = cb * a + sb * b
    q = sb * a - cb * b
    return p @ cq.T + q @ sq.T


def _pow_parts(u, gamma):
    """``(1+u)**(-gamma/2)`` and ``(1+u)**(-gamma/2) - 1`` without cancellation."""
    lp = -0.5 * gamma * np.log1p(u)
    return np.exp(lp), np.expm1(lp)


# ---------------------------------------------------------------------------
# G_{i,1}
# ---------------------------------------------------------------------------
@lru_cache(maxsize=32)
def _g1_rule(method: str, m_eta: int, gamma: float, levels: int, ratio: float, nodes: int):
    """Nodes ``eta'`` and weights (including ``A**(-gamma/2)``) for ``G_{i,1}``."""
    if method == "spectral":
        eta, w = periodic_singular_rule(m_eta, gamma)
        return np.asarray(eta), np.asarray(w)
    eta, w = graded_rule(levels, ratio, nodes, exponent=1.0 - gamma)
    a = 4.0 * np.sin(0.5 * eta) ** 2
    return np.asarray(eta), np.asarray(w) * a ** (-0.5 * gamma)


def difference_corrections(a, b, cb, sb, cq, sq, half_sq, g_b, g_e):
    """Correction ``(g(b) - g(b - eta')) - fl(g_b - g_e)`` for :func:`g1_integrand`.

    The exact difference is ``p (1 - cos j eta') - q sin j eta'`` with
    ``p = a cos jb + b sin jb``, ``q = a sin jb - b cos jb`` and
    ``1 - cos j eta' = 2 sin^2(j eta'/2)`` (``half_sq``), free of cancellation.
    """
    p = cb * a + sb * b
    q = sb * a - cb * b
    exact = p @ half_sq.T - q @ sq.T
    return exact - (g_b[:, None] - g_e)


def g1_integrand(gamma, rho, delta, gb, dgb, ge, dge, s, c, a, d0corr=0.0, d1corr=0.0):
    """The regularised ``G_{i,1}`` integrand ``F`` (complex input allowed).

    Parameters
    ----------
    gamma, rho, delta : float
    gb, dgb : array, broadcastable to (M, Q)
        ``g(b)``, ``g'(b)``.
    ge, dge : array, shape (M, Q)
        ``g(b - eta')``, ``g'(b - eta')``.
    s, c, a : array, shape (Q,)
        ``sin eta'``, ``cos eta'`` and ``A = 4 sin^2(eta'/2)``.
    d0corr, d1corr : array, shape (M, Q), optional
        Real corrections added to ``gb - ge`` and ``dgb - dge`` so that the
        differences keep full relative accuracy for tiny ``eta'`` (see
        :func:`difference_corrections`).  Being constants, they do not
        change derivatives with respect to the inputs.
    """
    sg = gb + ge
    d0 = (gb - ge) + d0corr
    d1 = (dgb - dge) + d1corr
    v = (rho * sg + delta * (d0 ** 2 / a + gb * ge)) / rho ** 2
    # (rho + d gb) dge - dgb (rho + d ge) = -rho d1 + d (dgb d0 - gb d1)
    n1 = (rho * sg + delta * (gb * ge + dgb * dge)) * s + (-rho * d1 + delta * (dgb * d0 - gb * d1)) * c
    if delta == 0.0:
        p, ev = 1.0, -0.5 * gamma * v
    else:
        u = delta * v
        if np.any(np.real(1.0 + u) <= 0.0):
            raise GeometryError("self-interaction denominator rho^2 A + d B is not positive")
        p, em = _pow_parts(u, gamma)
        ev = em / delta
    return rho ** (2.0 - gamma) * s * ev + rho ** (-gamma) * n1 * p


class _G1Setup:
    """Grids and samples shared by evaluation and differentiation of ``G_{i,1}``."""

    def __init__(self, ctx: FunctionalContext, i: int, beta=None):
        q = ctx.quad
        geom = ctx.geometries[i]
        self.gamma = ctx.gamma
        self.rho = geom.rho
        self.delta = geom.delta
        self.beta = ctx.beta if beta is None else np.asarray(beta, dtype=float).reshape(-1)
        n = ctx.n
        self.eta, self.w = _g1_rule(q.g1_method, ctx.m_eta, ctx.gamma, q.graded_levels, q.graded_ratio,
                                    q.graded_nodes)
        self.s, self.c = np.sin(self.eta), np.cos(self.eta)
        self.a = 4.0 * np.sin(0.5 * self.eta) ** 2
        self.cb, self.sb = trig_matrices(n, self.beta)
        self.cq, self.sq = trig_matrices(n, self.eta)
        self.j = np.arange(2, n + 1, dtype=float)
        ga, gb_ = geom.shape.a, geom.shape.b
        self.ga, self.gb_coef = ga, gb_
        self.g_b = self.cb @ ga + self.sb @ gb_
        self.dg_b = self.cb @ (self.j * gb_) - self.sb @ (self.j * ga)
        self.g_e = shifted_values(ga, gb_, self.cb, self.sb, self.cq, self.sq)
        self.dg_e = shifted_values(self.j * gb_, -self.j * ga, self.cb, self.sb, self.cq, self.sq)
        half_sq = 2.0 * np.sin(0.5 * np.outer(self.eta, self.j)) ** 2
        self.d0corr = difference_corrections(ga, gb_, self.cb, self.sb, self.cq, self.sq, half_sq, self.g_b, self.g_e)
        self.d1corr = difference_corrections(self.j * gb_, -self.j * ga, self.cb, self.sb, self.cq, self.sq, half_sq,
                                             self.dg_b, self.dg_e)
        self.r_b = self.rho + self.delta * self.g_b
        if np.any(self.r_b <= 0):
            raise GeometryError("radius function is not positive")
        self.pref = ctx.gamma_param.c_gamma / (2.0 * np.pi)

    def F(self, gb=None, dgb=None, ge=None, dge=None, rho=None):
        return g1_integrand(
            self.gamma,
            self.rho if rho is None else rho,
            self.delta,
            (self.g_b if gb is None else gb)[:, None],
            (self.dg_b if dgb is None else dgb)[:, None],
            self.g_e if ge is None else ge,
            self.dg_e if dge is None else dge,
            self.s,
            self.c,
            self.a,
            self.d0corr,
            self.d1corr,
        )

    def values(self):
        return self.pref * (self.F() @ self.w) / self.r_b


def _g1_limit_values(geom: PatchGeometry, beta, gamma: float) -> np.ndarray:
    n = geom.shape.n
    sig = sigma_spectrum(n, gamma).values[1:]
    j = np.arange(2, n + 1)
    lam = sig * j / geom.rho ** gamma
    c, s = trig_matrices(n, beta)
    return s @ (lam * geom.shape.a) - c @ (lam * geom.shape.b)


def eval_G1(ctx: FunctionalContext, i: int, beta=None) -> np.ndarray:
    """Self-interaction term ``G_{i,1}`` on a grid of ``b`` values.

    Parameters
    ----------
    ctx : FunctionalContext
    i : int
        Patch index.
    beta : array_like, optional
        Evaluation points (default: the collocation grid).

    Returns
    -------
    numpy.ndarray

    Raises
    ------
    GeometryError
        If a denominator is not positive.
    """
    geom = ctx.geometries[i]
    b = ctx.beta if beta is None else np.asarray(beta, dtype=float).reshape(-1)
    if geom.delta == 0.0:
        return _g1_limit_values(geom, b, ctx.gamma)
    return _G1Setup(ctx, i, b).values()


def limit_G1(ctx: FunctionalContext, i: int, beta=None) -> np.ndarray:
    """``eps = 0`` value of ``G_{i,1}`` (linear in ``g_i``, diagonal in Fourier modes)."""
    b = ctx.beta if beta is None else np.asarray(beta, dtype=float).reshape(-1)
    return _g1_limit_values(ctx.geometries[i], b, ctx.gamma)


def derivative_difference(h: FourierContour):
    """Callable ``(b, eta) -> h'(b) - h'(b - eta)`` free of cancellation.

    Uses ``sin x - sin y = 2 cos((x+y)/2) sin((x-y)/2)`` and the analogue for
    cosines, so the result keeps full relative accuracy as ``eta -> 0``
    (a plain difference loses all digits once ``b - eta`` rounds to ``b``).
    """
    def diff(b, eta):
        b, eta = np.broadcast_arrays(np.asarray(b, dtype=float), np.asarray(eta, dtype=float))
        out = np.zeros(b.shape)
        mid = b - 0.5 * eta
        for j, a_j, b_j in zip(h.modes, h.a, h.b):
            if a_j == 0.0 and b_j == 0.0:
                continue
            sj = np.sin(0.5 * j * eta)
            # h' = sum j (-a_j sin(j b) + b_j cos(j b))
            out += j * 2.0 * sj * (-a_j * np.cos(j * mid) - b_j * np.sin(j * mid))
        return out

    return diff


def gateaux_formula(h, dh, beta, rho: float, gamma: float, levels: int = 12, ratio: float = 0.5,
                    nodes: int = 8, dh_diff=None) -> np.ndarray:
    """Zero-size linearisation of ``G_{i,1}`` by graded quadrature.

    Evaluates::

        C/rho^gamma [ (1 - gamma/2) avg_eta h(b - eta) sin(eta) / A^(gamma/2)
                      - avg_eta (h'(b) - h'(b - eta)) cos(eta) / A^(gamma/2) ]

    where ``avg`` is ``(1/2pi) int_0^{2pi}`` and ``A = 4 sin^2(eta/2)``.

    Parameters
    ----------
    h, dh : callable
        Direction and its derivative (vectorised).
    beta : array_like
    rho, gamma : float
    levels, ratio, nodes : graded-rule parameters.
    dh_diff : callable, optional
        ``(b, eta) -> h'(b) - h'(b - eta)`` in a cancellation-free form (see
        :func:`derivative_difference`).  Without it the plain difference is
        used, which limits the accuracy to roughly ``(ulp/|eta|)`` on the
        innermost nodes; the lost mass scales like ``1e-13**(2-gamma)``.

    Returns
    -------
    numpy.ndarray
    """
    gp = GammaParam(gamma)
    beta = np.asarray(beta, dtype=float).reshape(-1)
    eta, w = graded_rule(levels, ratio, nodes, exponent=1.0 - gamma)
    kern = w * (4.0 * np.sin(0.5 * eta) ** 2) ** (-0.5 * gamma) / (2.0 * np.pi)
    arg = beta[:, None] - eta[None, :]
    t1 = (h(arg) * np.sin(eta)) @ kern
    if dh_diff is None:
        diff = dh(beta)[:, None] - dh(arg)
    else:
        diff = dh_diff(beta[:, None], eta[None, :])
    t2 = (diff * np.cos(eta)) @ kern
    return gp.c_gamma / rho ** gamma * ((1.0 - 0.5 * gamma) * t1 - t2)


def gateaux_G1(ctx: FunctionalContext, i: int, h, beta=None, method: str = "auto") -> np.ndarray:
    """Directional derivative of ``G_{i,1}`` in the shape direction ``h``.

    Parameters
    ----------
    ctx : FunctionalContext
    i : int
    h : FourierContour
    beta : array_like, optional
    method : {"auto", "formula", "complex-step"}
        ``"formula"`` (only at ``eps = 0``) integrates the zero-size
        linearisation by graded quadrature; ``"complex-step"`` differentiates
        the discretised ``G_{i,1}`` (``rho`` held fixed).  ``"auto"`` picks the
        formula at ``eps = 0``.

    Returns
    -------
    numpy.ndarray
    """
    geom = ctx.geometries[i]
    b = ctx.beta if beta is None else np.asarray(beta, dtype=float).reshape(-1)
    if method == "auto":
        method = "formula" if geom.delta == 0.0 else "complex-step"
    if method == "formula":
        if geom.delta != 0.0:
            raise DomainError("the closed linearisation formula holds at eps = 0 only")
        q = ctx.quad
        return gateaux_formula(lambda x: h.evaluate(x), lambda x: h.evaluate(x, 1), b, geom.rho, ctx.gamma,
                               q.graded_levels, q.graded_ratio, q.graded_nodes, dh_diff=derivative_difference(h))
    if method != "complex-step":
        raise DomainError(f"unknown method {method!r}")
    if geom.delta == 0.0:
        return _g1_limit_values(geom.with_shape(h), b, ctx.gamma)
    st = _G1Setup(ctx, i, b)
    t = _CSTEP
    ha, hb = h.a, h.b
    gb = st.g_b + 1j * t * (st.cb @ ha + st.sb @ hb)
    dgb = st.dg_b + 1j * t * (st.cb @ (st.j * hb) - st.sb @ (st.j * ha))
    ge = st.g_e + 1j * t * shifted_values(ha, hb, st.cb, st.sb, st.cq, st.sq)
    dge = st.dg_e + 1j * t * shifted_values(st.j * hb, -st.j * ha, st.cb, st.sb, st.cq, st.sq)
    rb = st.r_b + 1j * t * st.delta * (st.cb @ ha + st.sb @ hb)
    val = st.pref * (st.F(gb, dgb, ge, dge) @ st.w) / rb
    return val.imag / t


# ---------------------------------------------------------------------------
# G_{i,2}
# ---------------------------------------------------------------------------
def g2_integrand(gamma, eps, delta, rho_i, rho_j, gi, dgi, gj, dgj, xij, pb, pe, s, c, variant="R"):
    """Regularised ``G_{i,2}`` integrand for one source patch (complex input allowed).

    Parameters
    ----------
    gi, dgi : array, shape (M, 1)
        Target shape and derivative at ``b``.
    gj, dgj : array, shape (1, L)
        Source shape and derivative at ``eta``.
    xij : numpy.ndarray, shape (2,)
        ``x_i - x_j``.
    pb, pe : array
        ``x_ij . e_b`` (shape (M, 1)) and ``x_ij . e_eta`` (shape (1, L)).
    s, c : numpy.ndarray, shape (M, L)
        ``sin(b - eta)``, ``cos(b - eta)``.
    """
    aij = xij[0] ** 2 + xij[1] ** 2
    ri = rho_i + delta * gi
    rj = rho_j + delta * gj
    bij = 2.0 * (pb * ri - pe * rj) + eps * (ri ** 2 + rj ** 2 - 2.0 * ri * rj * c)
    bb = bij / aij
    if variant == "R":
        n1 = (rho_i * gj + rho_j * gi + delta * (gi * gj + dgi * dgj)) * s + (ri * dgj - dgi * rj) * c
    else:
        n1 = rho_j * gi * s - dgi * rho_j * c
    if eps == 0.0:
        p, e = 1.0, -0.5 * gamma * bb
        lead = 0.0
    else:
        u = eps * bb
        if np.any(np.real(1.0 + u) <= 0.0):
            raise GeometryError("interaction denominator A_ij + eps B_ij is not positive")
        p, em = _pow_parts(u, gamma)
        e = em / eps
        lead = abs(eps) ** gamma
    return aij ** (-0.5 * gamma) * (rho_i * rho_j * s * e + lead * n1 * p)


class _G2Setup:
    """Samples shared by evaluation and differentiation of ``G_{i,2}``."""

    def __init__(self, ctx: FunctionalContext, i: int, beta=None):
        self.ctx = ctx
        self.i = i
        self.beta = ctx.beta if beta is None else np.asarray(beta, dtype=float).reshape(-1)
        self.eta = uniform_grid(ctx.m_eta)
        n = ctx.n
        self.j = np.arange(2, n + 1, dtype=float)
        self.cb, self.sb = trig_matrices(n, self.beta)
        self.ce, self.se = trig_matrices(n, self.eta)
        self.eb = np.stack([np.cos(self.beta), np.sin(self.beta)], axis=-1)
        self.ee = np.stack([np.cos(self.eta), np.sin(self.eta)], axis=-1)
        d = self.beta[:, None] - self.eta[None, :]
        self.s, self.c = np.sin(d), np.cos(d)
        gi = ctx.geometries[i]
        self.gi = self.cb @ gi.shape.a + self.sb @ gi.shape.b
        self.dgi = self.cb @ (self.j * gi.shape.b) - self.sb @ (self.j * gi.shape.a)
        self.ri = gi.rho + gi.delta * self.gi
        self.pref = ctx.gamma_param.c_gamma / (2.0 * np.pi)
        self.weight = 2.0 * np.pi / ctx.m_eta

    def source(self, j: int):
        g = self.ctx.geometries[j]
        gj = self.ce @ g.shape.a + self.se @ g.shape.b
        dgj = self.ce @ (self.j * g.shape.b) - self.se @ (self.j * g.shape.a)
        return gj, dgj

    def F(self, j, gi=None, dgi=None, gj=None, dgj=None, rho_i=None, rho_j=None, xij=None):
        ctx = self.ctx
        geo_i, geo_j = ctx.geometries[self.i], ctx.geometries[j]
        if gj is None or dgj is None:
            gj0, dgj0 = self.source(j)
            gj = gj0 if gj is None else gj
            dgj = dgj0 if dgj is None else dgj
        if xij is None:
            xij = geo_i.center - geo_j.center
        return g2_integrand(
            ctx.gamma,
            geo_i.eps,
            geo_i.delta,
            geo_i.rho if rho_i is None else rho_i,
            geo_j.rho if rho_j is None else rho_j,
            (self.gi if gi is None else gi)[:, None],
            (self.dgi if dgi is None else dgi)[:, None],
            gj[None, :],
            dgj[None, :],
            xij,
            (self.eb @ xij)[:, None],
            (self.ee @ xij)[None, :],
            self.s,
            self.c,
            ctx.quad.g2_variant,
        )

    def values_from(self, j):
        return self.pref * self.weight * self.F(j).sum(axis=1) / self.ri


def eval_G2(ctx: FunctionalContext, i: int, beta=None) -> np.ndarray:
    """Patch-patch interaction term ``G_{i,2}`` (zero for a single patch).

    Raises
    ------
    SingularityError
        If two centers coincide.
    GeometryError
        If a denominator is not positive.
    """
    b = ctx.beta if beta is None else np.asarray(beta, dtype=float).reshape(-1)
    out = np.zeros(b.size)
    if ctx.m == 1:
        return out
    st = _G2Setup(ctx, i, b)
    for j in range(ctx.m):
        if j == i:
            continue
        if np.all(ctx.geometries[i].center == ctx.geometries[j].center):
            raise SingularityError(f"patches {i} and {j} share a center")
        out += st.values_from(j)
    return out


def limit_G2(ctx: FunctionalContext, i: int, beta=None) -> np.ndarray:
    """``eps -> 0`` limit ``(gamma C/2) sum_j rho_j^2 x_ij . (sin b, -cos b) / |x_ij|^(gamma+2)``."""
    b = ctx.beta if beta is None else np.asarray(beta, dtype=float).reshape(-1)
    g = ctx.gamma
    c = ctx.gamma_param.c_gamma
    out = np.zeros(b.size)
    xi = ctx.geometries[i].center
    for j, gj in enumerate(ctx.geometries):
        if j == i:
            continue
        d = xi - gj.center
        r2 = d @ d
        out += 0.5 * g * c * gj.rho ** 2 * (d[0] * np.sin(b) - d[1] * np.cos(b)) / r2 ** (0.5 * g + 1.0)
    return out


# ---------------------------------------------------------------------------
# G_{i,3}
# ---------------------------------------------------------------------------
def _source_nodes(ctx: FunctionalContext, j: int):
    """Points and weights of the ``(eta, t)`` quadrature over patch ``j``.

    Returns ``(points (S, 2), weights (S,))`` such that
    ``sum_s w_s f(y_s) ~ int_0^{2pi} int_0^{R_j(eta)} f(x_j + eps t e_eta) t dt d eta``.
    """
    q = ctx.quad
    geom = ctx.geometries[j]
    eps = geom.eps
    xg, wg = np.polynomial.legendre.leggauss(q.radial_nodes)
    t01, w01 = 0.5 * (xg + 1.0), 0.5 * wg
    eta_c = uniform_grid(q.core_eta)
    tt = geom.rho * t01
    pts = [geom.center + eps * tt[None, :, None] * np.stack([np.cos(eta_c), np.sin(eta_c)], -1)[:, None, :]]
    wts = [np.broadcast_to((2.0 * np.pi / q.core_eta) * geom.rho * w01 * tt, (q.core_eta, q.radial_nodes))]
    if geom.delta != 0.0:
        xs, ws = np.polynomial.legendre.leggauss(q.sliver_nodes)
        s01, sw01 = 0.5 * (xs + 1.0), 0.5 * ws
        eta = uniform_grid(ctx.m_eta)
        r = radius(geom, eta)
        th = geom.rho + (r - geom.rho)[:, None] * s01[None, :]
        e = np.stack([np.cos(eta), np.sin(eta)], -1)
        pts.append(geom.center + eps * th[:, :, None] * e[:, None, :])
        wts.append((2.0 * np.pi / ctx.m_eta) * (r - geom.rho)[:, None] * sw01[None, :] * th)
    points = np.concatenate([p.reshape(-1, 2) for p in pts])
    weights = np.concatenate([np.asarray(w).reshape(-1) for w in wts])
    return points, weights


def g3_field(ctx: FunctionalContext, i: int, targets) -> np.ndarray:
    """``V(z) = sum_j int int grad_x K0(z, x_j + eps t e_eta) t dt d eta`` at ``targets``.

    Parameters
    ----------
    ctx : FunctionalContext
    i : int
        Target patch (selects the source set via ``g3_coupling``).
    targets : array_like, shape (P, 2)

    Returns
    -------
    numpy.ndarray, shape (P, 2)
    """
    z = np.asarray(targets, dtype=float).reshape(-1, 2)
    out = np.zeros_like(z)
    for j in ctx.sources(i):
        pts, w = _source_nodes(ctx, j)
        grad = ctx.kernel.grad_x_k0(z[:, None, :], pts[None, :, :], method=ctx.quad.grad_method)
        out += np.einsum("psk,s->pk", grad, w)
    return out


def _g3_frame(geom: PatchGeometry, beta):
    r = radius(geom, beta)
    dr = geom.delta * geom.shape.evaluate(beta, 1)
    e = np.stack([np.cos(beta), np.sin(beta)], -1)
    eperp = np.stack([-np.sin(beta), np.cos(beta)], -1)
    return r, dr, e, eperp


def eval_G3(ctx: FunctionalContext, i: int, beta=None) -> np.ndarray:
    """Boundary-influence term ``G_{i,3}``.

    Raises
    ------
    DomainError
        If a quadrature point leaves the domain.
    """
    b = ctx.beta if beta is None else np.asarray(beta, dtype=float).reshape(-1)
    if ctx.kernel.domain_tag == "free":
        return np.zeros(b.size)
    geom = ctx.geometries[i]
    r, dr, e, eperp = _g3_frame(geom, b)
    z = geom.center + geom.eps * r[:, None] * e
    v = g3_field(ctx, i, z)
    t = eperp + (dr / r)[:, None] * e
    return -ctx.quad.g3_scale * np.einsum("pk,pk->p", t, v)


def limit_G3(ctx: FunctionalContext, i: int, beta=None) -> np.ndarray:
    """``eps -> 0`` limit ``c sum_j pi rho_j^2 (sin b, -cos b) . grad_x K0(x_i, x_j)``.

    ``c`` is the configured normalisation and the sum runs over the
    configured source set.
    """
    b = ctx.beta if beta is None else np.asarray(beta, dtype=float).reshape(-1)
    if ctx.kernel.domain_tag == "free":
        return np.zeros(b.size)
    xi = ctx.geometries[i].center
    tot = np.zeros(2)
    for j in ctx.sources(i):
        gj = ctx.geometries[j]
        tot += np.pi * gj.rho ** 2 * ctx.kernel.grad_x_k0(xi, gj.center, method=ctx.quad.grad_method)
    return ctx.quad.g3_scale * (tot[0] * np.sin(b) - tot[1] * np.cos(b))


# ---------------------------------------------------------------------------
# totals
# ---------------------------------------------------------------------------
def eval_terms(ctx: FunctionalContext, i: int, beta=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(G_{i,1}, G_{i,2}, G_{i,3})`` on the grid."""
    return eval_G1(ctx, i, beta), eval_G2(ctx, i, beta), eval_G3(ctx, i, beta)


def eval_G(ctx: FunctionalContext, i: int, beta=None) -> np.ndarray:
    """``G_i = G_{i,1} + G_{i,2} + G_{i,3}`` pointwise."""
    g1, g2, g3 = eval_terms(ctx, i, beta)
    return g1 + g2 + g3


def kernel_parts(ctx: FunctionalContext, i: int, j: int, beta, eta) -> KernelParts:
    """``A``, ``B`` (for patch ``i``) and ``A_ij``, ``B_ij`` on a ``(b, eta)`` mesh."""
    beta = np.asarray(beta, dtype=float)[:, None]
    eta = np.asarray(eta, dtype=float)[None, :]
    gi = ctx.geometries[i]
    d = gi.delta
    a = 4.0 * np.sin(0.5 * (beta - eta)) ** 2
    g_b = gi.shape.evaluate(beta)
    g_e = gi.shape.evaluate(eta)
    bb = gi.rho * (g_b + g_e) * a + d * ((g_b - g_e) ** 2 + g_b * g_e * a)
    if i == j:
        return KernelParts(a, bb, float("nan"), np.full(a.shape, np.nan))
    gj = ctx.geometries[j]
    xij = gi.center - gj.center
    ri = gi.rho + d * g_b
    rj = gj.rho + d * gj.shape.evaluate(eta)
    vx = ri * np.cos(beta) - rj * np.cos(eta)
    vy = ri * np.sin(beta) - rj * np.sin(eta)
    bij = 2.0 * (xij[0] * vx + xij[1] * vy) + gi.eps * (vx ** 2 + vy ** 2)
    return KernelParts(a, bb, float(xij @ xij), bij)
