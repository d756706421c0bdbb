"""The zero-size linearisation and the Newton matrix.

At ``eps = 0`` and ``g = 0`` the shape derivative of ``G_i`` is diagonal in
Fourier modes::

    cos(j b) -> (sigma_j j / rho^gamma) sin(j b)
    sin(j b) -> -(sigma_j j / rho^gamma) cos(j b)

and block-diagonal across patches.  :class:`SpectralOperator` applies and
inverts this map.  :func:`assemble_jacobian` builds the full Newton matrix of
the nonlinear system (see :mod:`gsqg_patches.system`) at any ``eps``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contour import FourierContour, drho_dcoeffs
from .errors import DomainError, NotInRangeError
from .functional import (
    _CSTEP,
    FunctionalContext,
    _G1Setup,
    _G2Setup,
    _g3_frame,
    derivative_difference,
    eval_G2,
    eval_G3,
    g3_field,
    gateaux_formula,
    trig_matrices,
)
from .contour import radius, uniform_grid
from .special import SigmaSpectrum, sigma_spectrum
from .system import ContinuationState, Problem, assemble_rows, projection_matrices, residual_vector

__all__ = [
    "SpectralOperator",
    "apply_L0",
    "invert_L0",
    "apply_L0_quadrature",
    "operator_matrix",
    "assemble_jacobian",
    "jacobian_blocks",
]


@dataclass(frozen=True)
class SpectralOperator:
    """Diagonal zero-size linearisation for ``m`` patches.

    Attributes
    ----------
    gamma : float
    rho : numpy.ndarray
        Base radii of the patches.
    n : int
        Truncation order.
    spectrum : SigmaSpectrum
    """

    gamma: float
    rho: np.ndarray
    n: int
    spectrum: SigmaSpectrum = field(init=False)

    def __post_init__(self):
        r = np.array(self.rho, dtype=float).reshape(-1)
        if not np.all(r > 0):
            raise DomainError("radii must be positive")
        r.setflags(write=False)
        object.__setattr__(self, "rho", r)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "spectrum", sigma_spectrum(self.n, self.gamma))

    def eigenvalues(self, i: int) -> np.ndarray:
        """``sigma_j j / rho_i^gamma`` for ``j = 2..N``."""
        return self.spectrum.eigenvalues(self.rho[i])[1:]


def apply_L0(op: SpectralOperator, i: int, g: FourierContour) -> FourierContour:
    """Image of ``g`` under the linearisation, as a contour in the ``Y_0`` modes.

    ``a_j cos + b_j sin  ->  lam_j (a_j sin - b_j cos)``, ``lam_j = sigma_j j/rho_i^gamma``.
    """
    if g.n > op.n:
        raise DomainError(f"contour order {g.n} exceeds operator truncation {op.n}")
    lam = op.eigenvalues(i)[: g.n - 1]
    return FourierContour(-lam * g.b, lam * g.a)


def invert_L0(op: SpectralOperator, i: int, p, *, c1: float = 0.0, s1: float = 0.0) -> FourierContour:
    """Solve ``apply_L0(op, i, h) = p``.

    Parameters
    ----------
    op : SpectralOperator
    i : int
    p : FourierContour
        Right-hand side in the ``j >= 2`` modes.
    c1, s1 : float
        Coefficients of ``cos b`` and ``sin b`` carried by the right-hand
        side (e.g. from :func:`~gsqg_patches.contour.project_modes`).  They
        must vanish: the first harmonics are not in the range.

    Raises
    ------
    NotInRangeError
        If ``c1`` or ``s1`` is nonzero.
    """
    if c1 != 0.0 or s1 != 0.0:
        raise NotInRangeError("first-harmonic content is not in the range of the linearisation (sigma_1 = 0)")
    if p.n > op.n:
        raise DomainError(f"contour order {p.n} exceeds operator truncation {op.n}")
    lam = op.eigenvalues(i)[: p.n - 1]
    # p = c_j cos + d_j sin  with  c_j = -lam b_j,  d_j = lam a_j
    return FourierContour(p.b / lam, -p.a / lam)


def apply_L0_quadrature(h, dh, beta, rho: float, gamma: float, levels: int = 12, ratio: float = 0.5,
                        nodes: int = 8, dh_diff=None) -> np.ndarray:
    """Independent evaluation of the linearisation by graded quadrature.

    ``h`` is either a :class:`FourierContour` (``dh`` is then ignored and the
    derivative difference is formed without cancellation) or a vectorised
    callable with derivative ``dh``; see
    :func:`gsqg_patches.functional.gateaux_formula`.
    """
    if isinstance(h, FourierContour):
        g = h
        return gateaux_formula(lambda x: g.evaluate(x), lambda x: g.evaluate(x, 1), beta, rho, gamma, levels,
                               ratio, nodes, dh_diff=derivative_difference(g))
    return gateaux_formula(h, dh, beta, rho, gamma, levels, ratio, nodes, dh_diff=dh_diff)


def operator_matrix(op: SpectralOperator) -> np.ndarray:
    """Block-diagonal matrix of the projected linearisation in the residual layout.

    Rows are trapezoid projections ``int . cos(j b)``, ``int . sin(j b)``
    (``pi`` times the coefficients); columns are ``(a_2..a_N, b_2..b_N)``.
    """
    k = op.n - 1
    m = op.rho.size
    out = np.zeros((2 * k * m, 2 * k * m))
    for i in range(m):
        lam = np.pi * op.eigenvalues(i)
        blk = np.zeros((2 * k, 2 * k))
        blk[:k, k:] = -np.diag(lam)  # cos rows from b
        blk[k:, :k] = np.diag(lam)  # sin rows from a
        out[2 * k * i:2 * k * (i + 1), 2 * k * i:2 * k * (i + 1)] = blk
    return out


# ---------------------------------------------------------------------------
# semi-analytic partial derivatives on the collocation grid
# ---------------------------------------------------------------------------
def _g1_partials(ctx: FunctionalContext, i: int):
    """``dG_{i,1}/d(a, b)`` (shape (M, 2K)) at fixed ``rho``, and ``dG_{i,1}/d rho``."""
    geom = ctx.geometries[i]
    n = ctx.n
    j = np.arange(2, n + 1, dtype=float)
    cb, sb = trig_matrices(n, ctx.beta)
    if geom.delta == 0.0:
        lam = sigma_spectrum(n, ctx.gamma).values[1:] * j / geom.rho ** ctx.gamma
        jac = np.hstack([sb * lam, -cb * lam])
        g1 = sb @ (lam * geom.shape.a) - cb @ (lam * geom.shape.b)
        return jac, -ctx.gamma / geom.rho * g1
    st = _G1Setup(ctx, i)
    t = _CSTEP
    w = st.w
    f0 = st.F() @ w
    f_gb = (st.F(gb=st.g_b + 1j * t).imag / t) @ w
    f_dgb = (st.F(dgb=st.dg_b + 1j * t).imag / t) @ w
    fw_ge = (st.F(ge=st.g_e + 1j * t).imag / t) * w
    fw_dge = (st.F(dge=st.dg_e + 1j * t).imag / t) * w
    xc, xs = fw_ge @ st.cq, fw_ge @ st.sq
    yc, ys = fw_dge @ st.cq, fw_dge @ st.sq
    pre = (st.pref / st.r_b)[:, None]
    corr = (st.pref * f0 / st.r_b ** 2 * st.delta)[:, None]
    ja = pre * (f_gb[:, None] * cb - f_dgb[:, None] * (j * sb) + cb * xc + sb * xs - j * (sb * yc - cb * ys)) - corr * cb
    jb = pre * (f_gb[:, None] * sb + f_dgb[:, None] * (j * cb) + sb * xc - cb * xs + j * (cb * yc + sb * ys)) - corr * sb
    val = st.pref * (st.F(rho=st.rho + 1j * t) @ w) / (st.r_b + 1j * t)
    return np.hstack([ja, jb]), val.imag / t


def _g2_partials(ctx: FunctionalContext, i: int, j: int):
    """Partials of the ``j``-th source contribution to ``G_{i,2}``.

    Returns ``(J_i, drho_i, J_j, drho_j)``: shape derivatives with respect to
    patch ``i`` and patch ``j`` at fixed radii, and the radius derivatives.
    """
    st = _G2Setup(ctx, i)
    n = ctx.n
    jj = st.j
    cb, sb = st.cb, st.sb
    ce, se = st.ce, st.se
    t = _CSTEP
    gj, dgj = st.source(j)
    geo_i, geo_j = ctx.geometries[i], ctx.geometries[j]
    pw = st.pref * st.weight
    f0 = st.F(j).sum(axis=1)
    f_gi = (st.F(j, gi=st.gi + 1j * t).imag / t).sum(axis=1)
    f_dgi = (st.F(j, dgi=st.dgi + 1j * t).imag / t).sum(axis=1)
    f_gj = st.F(j, gj=gj + 1j * t).imag / t
    f_dgj = st.F(j, dgj=dgj + 1j * t).imag / t
    pre = (pw / st.ri)[:, None]
    corr = (pw * f0 / st.ri ** 2 * geo_i.delta)[:, None]
    ja_i = pre * (f_gi[:, None] * cb - f_dgi[:, None] * (jj * sb)) - corr * cb
    jb_i = pre * (f_gi[:, None] * sb + f_dgi[:, None] * (jj * cb)) - corr * sb
    ja_j = pre * (f_gj @ ce - f_dgj @ (jj * se))
    jb_j = pre * (f_gj @ se + f_dgj @ (jj * ce))
    v_ri = pw * st.F(j, rho_i=geo_i.rho + 1j * t).sum(axis=1) / (st.ri + 1j * t)
    d_rj = pw * (st.F(j, rho_j=geo_j.rho + 1j * t).imag / t).sum(axis=1) / st.ri
    return np.hstack([ja_i, jb_i]), v_ri.imag / t, np.hstack([ja_j, jb_j]), d_rj


def _g3_partials(ctx: FunctionalContext, i: int):
    """Partials of ``G_{i,3}``.

    Returns ``(J_target, drho_target, {j: (J_source_j, drho_source_j)})``.
    """
    n = ctx.n
    jj = np.arange(2, n + 1, dtype=float)
    mg = ctx.m_grid
    k = n - 1
    zeros = (np.zeros((mg, 2 * k)), np.zeros(mg))
    if ctx.kernel.domain_tag == "free":
        return zeros[0], zeros[1], {}
    geom = ctx.geometries[i]
    beta = ctx.beta
    cb, sb = trig_matrices(n, beta)
    c = ctx.quad.g3_scale
    r, dr, e, eperp = _g3_frame(geom, beta)
    z = geom.center + geom.eps * r[:, None] * e
    tvec = eperp + (dr / r)[:, None] * e
    v = g3_field(ctx, i, z)
    ev = np.einsum("pk,pk->p", e, v)
    if geom.eps != 0.0:
        hz = 1e-5 * ctx.kernel.radius
        dv = (g3_field(ctx, i, z + hz * e) - g3_field(ctx, i, z - hz * e)) / (2.0 * hz)
        d_r = -c * (-(dr / r ** 2) * ev + geom.eps * np.einsum("pk,pk->p", tvec, dv))
    else:
        d_r = np.zeros(mg)
    d_dg = -c * (geom.delta / r) * ev
    jt = np.hstack([
        d_r[:, None] * geom.delta * cb - d_dg[:, None] * (jj * sb),
        d_r[:, None] * geom.delta * sb + d_dg[:, None] * (jj * cb),
    ])
    sources = {}
    eta = uniform_grid(ctx.m_eta)
    ce, se = trig_matrices(n, eta)
    ee = np.stack([np.cos(eta), np.sin(eta)], -1)
    for j in ctx.sources(i):
        gj = ctx.geometries[j]
        rj = radius(gj, eta)
        y = gj.center + gj.eps * rj[:, None] * ee
        grad = ctx.kernel.grad_x_k0(z[:, None, :], y[None, :, :], method=ctx.quad.grad_method)
        dmat = -c * np.einsum("pk,plk->pl", tvec, grad) * (rj * 2.0 * np.pi / ctx.m_eta)[None, :]
        sources[j] = (np.hstack([gj.delta * (dmat @ ce), gj.delta * (dmat @ se)]), dmat.sum(axis=1))
    return jt, d_r, sources


def _grid_jacobian_shapes(ctx: FunctionalContext, state: ContinuationState):
    """``dG_i/d(shape_k)`` on the grid, radii eliminated, as an array (m, M, m*2K)."""
    m, n, mg = ctx.m, ctx.n, ctx.m_grid
    k2 = 2 * (n - 1)
    out = np.zeros((m, mg, m * k2))
    drho = [drho_dcoeffs(state.eps, state.shapes[p], state.rhos[p], state.gamma) for p in range(m)]

    def add(i, p, jac, d_rho):
        out[i, :, p * k2:(p + 1) * k2] += jac + np.outer(d_rho, drho[p])

    for i in range(m):
        jac, dr = _g1_partials(ctx, i)
        add(i, i, jac, dr)
        for j in range(m):
            if j == i:
                continue
            ji, dri, jjj, drj = _g2_partials(ctx, i, j)
            add(i, i, ji, dri)
            add(i, j, jjj, drj)
        jt, drt, src = _g3_partials(ctx, i)
        add(i, i, jt, drt)
        for j, (js, drs) in src.items():
            add(i, j, js, drs)
    return out


def _center_dependent(state: ContinuationState, problem: Problem) -> np.ndarray:
    ctx = state.context(problem, check=False)
    return np.stack([eval_G2(ctx, i) + eval_G3(ctx, i) for i in range(ctx.m)])


def _grid_jacobian_centers(state: ContinuationState, problem: Problem, step: float):
    m = state.m
    cols = []
    for p in range(m):
        for ax in range(2):
            vals = []
            for sgn in (1.0, -1.0):
                c = np.array(state.centers)
                c[p, ax] += sgn * step
                st = ContinuationState(state.eps, c, state.shapes, state.kappas, state.gamma)
                vals.append(_center_dependent(st, problem))
            cols.append((vals[0] - vals[1]) / (2.0 * step))
    return np.stack(cols, axis=-1)  # (m, M, 2m)


def jacobian_blocks(state: ContinuationState, problem: Problem) -> dict:
    """Block norms of the Newton matrix (diagnostics)."""
    jac = assemble_jacobian(state, problem)
    m, k2 = state.m, 2 * (state.n - 1)
    ns = m * k2
    return {
        "shape_shape": float(np.linalg.norm(jac[:ns, :ns])),
        "shape_center": float(np.linalg.norm(jac[:ns, ns:])),
        "center_shape": float(np.linalg.norm(jac[ns:, :ns])),
        "center_center": float(np.linalg.norm(jac[ns:, ns:])),
        "condition": float(np.linalg.cond(jac)),
    }


def assemble_jacobian(state: ContinuationState, problem: Problem, method: str = "semi-analytic",
                      central: bool = False) -> np.ndarray:
    """Newton matrix of the residual with respect to (shapes, centers).

    Parameters
    ----------
    state : ContinuationState
    problem : Problem
    method : {"semi-analytic", "fd"}
        ``"semi-analytic"`` differentiates the discretised integrands
        pointwise (complex step) and contracts with the Fourier basis; the
        center columns use central differences of the interaction terms.
        ``"fd"`` differences the full residual map with per-variable steps
        ``1e-6 max(1, |u|)`` (shapes) and ``1e-6 * radius`` (centers).
    central : bool
        Central instead of one-sided differences for ``method="fd"``.

    Returns
    -------
    numpy.ndarray, shape (size, size)
    """
    step_c = 1e-6 * problem.kernel.radius
    if method == "fd":
        u0 = state.unknowns()
        r0 = residual_vector(state, problem, check=False)
        ns = state.m * 2 * (state.n - 1)
        jac = np.empty((r0.size, u0.size))
        for col in range(u0.size):
            h = 1e-6 * max(1.0, abs(u0[col])) if col < ns else step_c
            up = u0.copy()
            up[col] += h
            rp = residual_vector(state.with_unknowns(up), problem, check=False)
            if central:
                um = u0.copy()
                um[col] -= h
                rm = residual_vector(state.with_unknowns(um), problem, check=False)
                jac[:, col] = (rp - rm) / (2.0 * h)
            else:
                jac[:, col] = (rp - r0) / h
        return jac
    if method != "semi-analytic":
        raise DomainError(f"unknown Jacobian method {method!r}")
    ctx = state.context(problem, check=False)
    gs = _grid_jacobian_shapes(ctx, state)
    gc = _grid_jacobian_centers(state, problem, step_c)
    grid = np.concatenate([gs, gc], axis=-1)  # (m, M, size)
    m, n = state.m, state.n
    ps, pc = projection_matrices(n, ctx.m_grid)
    rows = [ps @ grid[i] for i in range(m)] + [pc @ grid[i] for i in range(m)]
    return np.concatenate(rows, axis=0)
