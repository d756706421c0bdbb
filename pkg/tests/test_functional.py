import numpy as np
import pytest
from scipy import integrate

from gsqg_patches.contour import FourierContour, PatchGeometry, radius
from gsqg_patches.errors import DomainError, GeometryError
from gsqg_patches.functional import (
    FunctionalContext,
    QuadratureConfig,
    derivative_difference,
    eval_G,
    eval_G1,
    eval_G2,
    eval_G3,
    eval_terms,
    g3_field,
    gateaux_G1,
    limit_G1,
    limit_G2,
    limit_G3,
)
from gsqg_patches.green import disc, free_space


def _shape(n, seed=0, decay=4.0):
    rng = np.random.default_rng(seed)
    j = np.arange(2, n + 1)
    return FourierContour(rng.normal(size=n - 1) / j ** decay, rng.normal(size=n - 1) / j ** decay)


def _ctx(gamma=1.5, eps=0.05, n=16, quad=None, kernel=None):
    g = _shape(n)
    geoms = [PatchGeometry([0.3, 0.1], 0.9, eps, g, gamma),
             PatchGeometry([-0.35, 0.05], 1.1, eps, g.rotated(1.0), gamma)]
    return FunctionalContext(kernel or disc(1.0, gamma), geoms, quad or QuadratureConfig())


def test_quadrature_config_validation():
    with pytest.raises(DomainError):
        QuadratureConfig(g1_method="simpson")
    with pytest.raises(DomainError):
        QuadratureConfig(core_eta=2)
    q = QuadratureConfig()
    assert q.grid_size(16) == 64
    with pytest.raises(DomainError):
        QuadratureConfig(n_grid=20).grid_size(16)
    r = q.refined()
    assert (r.eta_factor, r.graded_levels, r.core_eta) == (2, 24, 64)


def test_context_validation():
    g = FourierContour.zeros(8)
    with pytest.raises(DomainError):
        FunctionalContext(disc(1.0, 1.5), [PatchGeometry([0, 0], 1.0, 0.1, g, 1.5),
                                           PatchGeometry([0.5, 0], 1.0, 0.2, g, 1.5)])
    with pytest.raises(GeometryError):
        FunctionalContext(disc(1.0, 1.5), [PatchGeometry([0.95, 0], 1.0, 0.1, g, 1.5)])
    with pytest.raises(GeometryError):
        FunctionalContext(disc(1.0, 1.5), [PatchGeometry([0.1, 0], 1.0, 0.1, g, 1.5),
                                           PatchGeometry([-0.05, 0], 1.0, 0.1, g, 1.5)])
    with pytest.raises(DomainError):
        FunctionalContext(disc(1.0, 1.25), [PatchGeometry([0.1, 0], 1.0, 0.1, g, 1.5)])


@pytest.mark.parametrize("gamma", [1.25, 1.5, 1.75])
def test_g1_spectral_and_graded_engines_agree(gamma):
    a = eval_G1(_ctx(gamma), 0)
    b = eval_G1(_ctx(gamma, quad=QuadratureConfig(g1_method="graded")), 0)
    assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(a))


def test_g1_circle_vanishes():
    g = FourierContour.zeros(8)
    ctx = FunctionalContext(disc(1.0, 1.5), [PatchGeometry([0.1, 0.0], 1.0, 0.1, g, 1.5)])
    assert np.max(np.abs(eval_G1(ctx, 0))) < 1e-14


def test_g1_at_zero_size_equals_limit():
    ctx = _ctx(eps=0.0)
    assert np.allclose(eval_G1(ctx, 0), limit_G1(ctx, 0), atol=1e-14)


def test_g1_is_rotation_covariant():
    # rotating the shape by phi shifts G1 by phi
    n = 16
    g = _shape(n)
    k = disc(1.0, 1.5)
    beta = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    phi = 2 * np.pi * 5 / 64
    c1 = FunctionalContext(k, [PatchGeometry([0, 0], 1.0, 0.1, g, 1.5)])
    c2 = FunctionalContext(k, [PatchGeometry([0, 0], 1.0, 0.1, g.rotated(phi), 1.5)])
    assert np.allclose(eval_G1(c2, 0, beta), np.roll(eval_G1(c1, 0, beta), 5), atol=1e-13)


def test_derivative_difference_matches_plain_difference():
    g = _shape(10)
    d = derivative_difference(g)
    b = np.linspace(0, 6, 7)[:, None]
    e = np.array([0.3, 1.0, -2.0])[None, :]
    assert np.allclose(d(b, e), g.evaluate(b, 1) - g.evaluate(b - e, 1), atol=1e-14)
    # tiny offsets: linear in eta with slope g''(b)
    tiny = 1e-14
    assert np.allclose(d(b, tiny) / tiny, g.evaluate(b, 2), rtol=1e-8)


def test_gateaux_formula_vs_central_difference_at_zero_size():
    n = 12
    k = disc(1.0, 1.5)
    g = _shape(n, seed=3)
    h = _shape(n, seed=4)
    ctx = FunctionalContext(k, [PatchGeometry([0.1, 0.0], 1.0, 0.0, g, 1.5)])
    lin = gateaux_G1(ctx, 0, h, method="formula")
    t = 1e-4
    up = FunctionalContext(k, [PatchGeometry([0.1, 0.0], 1.0, 0.0, g + h * t, 1.5)])
    dn = FunctionalContext(k, [PatchGeometry([0.1, 0.0], 1.0, 0.0, g - h * t, 1.5)])
    fd = (eval_G1(up, 0) - eval_G1(dn, 0)) / (2 * t)
    assert np.max(np.abs(lin - fd)) <= 1e-8 * np.max(np.abs(fd))


def test_gateaux_complex_step_vs_central_difference_positive_size():
    n = 12
    k = disc(1.0, 1.5)
    g = _shape(n, seed=3)
    h = _shape(n, seed=4)
    eps = 0.2

    def G(shape):
        return eval_G1(FunctionalContext(k, [PatchGeometry([0.1, 0.0], 1.0, eps, shape, 1.5)]), 0)

    ctx = FunctionalContext(k, [PatchGeometry([0.1, 0.0], 1.0, eps, g, 1.5)])
    cs = gateaux_G1(ctx, 0, h)
    t = 1e-4
    fd = (G(g + h * t) - G(g - h * t)) / (2 * t)
    assert np.max(np.abs(cs - fd)) <= 1e-7 * np.max(np.abs(fd))
    with pytest.raises(DomainError):
        gateaux_G1(ctx, 0, h, method="formula")


def test_g2_single_patch_zero_and_free_space_limit():
    ctx = _ctx()
    single = ctx.with_geometries(ctx.geometries[:1])
    assert np.all(eval_G2(single, 0) == 0.0)
    free = _ctx(eps=1e-3, kernel=free_space(1.5))
    assert np.max(np.abs(eval_G2(free, 0) - limit_G2(free, 0))) < 1e-2 * np.max(np.abs(limit_G2(free, 0)))


def test_g3_free_space_vanishes():
    ctx = _ctx(kernel=free_space(1.5))
    assert np.all(eval_G3(ctx, 0) == 0.0)


def test_g3_field_against_brute_force_double_integral():
    ctx = _ctx(eps=0.1)
    geom = ctx.geometries[0]
    z = np.array([[0.3, 0.25], [0.0, -0.4]])
    got = g3_field(ctx, 0, z)
    k = ctx.kernel
    for p, zp in enumerate(z):
        for comp in range(2):
            def f(t, eta):
                y = geom.center + geom.eps * t * np.array([np.cos(eta), np.sin(eta)])
                return k.grad_x_k0(zp, y, method="analytic")[comp] * t

            ref = integrate.dblquad(f, 0, 2 * np.pi, 0, lambda eta: float(radius(geom, eta)),
                                    epsabs=1e-13, epsrel=1e-11)[0]
            assert got[p, comp] == pytest.approx(ref, rel=1e-9, abs=1e-13)


def test_g3_coupling_and_normalization_options():
    base = eval_G3(_ctx(), 0)
    printed = eval_G3(_ctx(quad=QuadratureConfig(g3_normalization="printed")), 0)
    assert np.allclose(printed, 2 * np.pi * base, rtol=1e-13)
    allc = eval_G3(_ctx(quad=QuadratureConfig(g3_coupling="all")), 0)
    assert not np.allclose(allc, base)


@pytest.mark.parametrize("name,evalf,limf,expected", [
    ("G1", eval_G1, limit_G1, 2.5), ("G2", eval_G2, limit_G2, 1.0), ("G3", eval_G3, limit_G3, 1.0)])
def test_limit_rates(name, evalf, limf, expected):
    eps = [1e-2, 5e-3, 2.5e-3]
    errs = []
    for e in eps:
        c = _ctx(eps=e)
        errs.append(np.max(np.abs(evalf(c, 0) - limf(c, 0))))
    slope = np.polyfit(np.log(eps), np.log(errs), 1)[0]
    assert abs(slope - expected) <= 0.2


def test_eval_terms_sum_to_eval_g():
    ctx = _ctx()
    t1, t2, t3 = eval_terms(ctx, 1)
    assert np.allclose(t1 + t2 + t3, eval_G(ctx, 1), atol=1e-15)


def test_refined_quadrature_changes_little():
    a = eval_G(_ctx(), 0)
    b = eval_G(_ctx(quad=QuadratureConfig().refined()), 0)
    assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(a))
