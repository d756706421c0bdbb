import numpy as np
import pytest

from gsqg_patches.errors import DomainError, SingularityError
from gsqg_patches.green import disc, free_space
from gsqg_patches.kr import (
    VortexConfiguration,
    canonical_rotation,
    default_seeds,
    find_critical_points,
    grad_w_m,
    hess_w_m,
    symmetric_pair_distance,
    w_m,
)
from gsqg_patches.special import c_gamma


def test_configuration_invariants():
    with pytest.raises(DomainError):
        VortexConfiguration([[0.0, 0.0]], [-1.0])
    with pytest.raises(SingularityError):
        VortexConfiguration([[0.1, 0.0], [0.1, 0.0]], [1.0, 1.0])
    with pytest.raises(DomainError):
        VortexConfiguration([[0.1, 0.0]], [1.0, 2.0])


def test_single_vortex_is_self_term():
    k = disc(1.0, 1.5)
    c = VortexConfiguration([[0.2, 0.1]], [2.0])
    assert w_m(k, c) == pytest.approx(4.0 * k.k0([0.2, 0.1], [0.2, 0.1]), rel=1e-15)


def test_free_space_pair_counts_both_orders():
    k = free_space(1.5)
    c = VortexConfiguration([[0.0, 0.0], [0.5, 0.0]], [1.0, 2.0])
    assert w_m(k, c) == pytest.approx(-2 * 2.0 * c_gamma(1.5) * 0.5 ** -1.5, rel=1e-14)


@pytest.mark.parametrize("g", ["1.25", "1.5", "1.75"])
def test_disc_pair_matches_direct_summation_oracle(oracles, g):
    k = disc(1.0, float(g))
    for d, ref in oracles["pair_w"][g].items():
        d = float(d)
        c = VortexConfiguration([[d, 0.0], [-d, 0.0]], [1.0, 1.0])
        assert w_m(k, c) == pytest.approx(ref, rel=1e-11)


def test_outside_point_rejected():
    with pytest.raises(DomainError):
        w_m(disc(1.0, 1.5), VortexConfiguration([[1.1, 0.0]], [1.0]))


def test_gradient_at_center_vanishes():
    assert np.allclose(grad_w_m(disc(1.0, 1.5), VortexConfiguration([[0.0, 0.0]], [1.0])), 0.0, atol=1e-14)


def _fd_grad(k, c, h=1e-6):
    x0 = c.points.reshape(-1)
    out = np.empty_like(x0)
    for i in range(x0.size):
        e = np.zeros_like(x0)
        e[i] = h
        out[i] = (w_m(k, c.with_points((x0 + e).reshape(-1, 2))) - w_m(k, c.with_points((x0 - e).reshape(-1, 2)))) / (2 * h)
    return out


def test_gradient_matches_finite_differences_random():
    rng = np.random.default_rng(11)
    k = disc(1.0, 1.5)
    for _ in range(20):
        m = rng.integers(1, 4)
        r = 0.8 * np.sqrt(rng.uniform(size=m))
        t = rng.uniform(0, 2 * np.pi, size=m)
        pts = np.stack([r * np.cos(t), r * np.sin(t)], axis=1)
        c = VortexConfiguration(pts, rng.uniform(0.5, 2.0, size=m))
        if m > 1 and min(np.linalg.norm(pts[i] - pts[j]) for i in range(m) for j in range(i)) < 0.1:
            continue
        g = grad_w_m(k, c)
        assert np.max(np.abs(g - _fd_grad(k, c))) <= 1e-6 * max(1.0, np.max(np.abs(g)))


def test_free_space_gradient_equal_and_opposite():
    g = grad_w_m(free_space(1.5), VortexConfiguration([[0.0, 0.1], [0.4, -0.2]], [1.0, 1.0]))
    assert np.allclose(g[:2], -g[2:], rtol=1e-14)


def test_hessian_symmetry_and_center_isotropy():
    k = disc(1.0, 1.5)
    c = VortexConfiguration([[0.3, 0.1], [-0.2, -0.4]], [1.0, 1.5])
    h = hess_w_m(k, c, symmetrize=False)
    assert np.linalg.norm(h - h.T) / np.linalg.norm(h) <= 1e-4
    h0 = hess_w_m(k, VortexConfiguration([[0.0, 0.0]], [1.0]))
    assert np.allclose(h0, h0[0, 0] * np.eye(2), atol=1e-7 * abs(h0[0, 0]))


def test_hessian_eigenvalues_richardson_oracle():
    k = disc(1.0, 1.5)
    c = VortexConfiguration([[0.3, 0.1], [-0.2, -0.4]], [1.0, 1.5])
    h1 = hess_w_m(k, c, h=2e-4)
    h2 = hess_w_m(k, c, h=1e-4)
    ref = (4 * h2 - h1) / 3
    e, eref = np.linalg.eigvalsh(h2), np.linalg.eigvalsh(ref)
    assert np.allclose(e, eref, rtol=1e-4)


def test_single_vortex_critical_point_is_center():
    k = disc(1.0, 1.5)
    (cp,) = find_critical_points(k, [VortexConfiguration([[0.3, -0.2]], [1.0])])
    assert np.allclose(cp.config.points, 0.0, atol=1e-9)
    assert cp.nondegenerate and cp.index == 2
    assert cp.grad_norm <= 1e-10


def test_symmetric_pair_matches_reduced_oracle(oracles):
    k = disc(1.0, 1.5)
    seeds = [VortexConfiguration([[0.5, 0.05], [-0.55, 0.0]], [1.0, 1.0])]
    (cp,) = find_critical_points(k, seeds)
    d = np.linalg.norm(cp.config.points[0] - cp.config.points[1]) / 2
    assert d == pytest.approx(oracles["pair_dstar"]["1.5"], abs=1e-9)
    assert np.allclose(cp.config.points[:, 1], 0.0, atol=1e-12)
    assert cp.reduced_nondegenerate
    assert cp.grad_norm <= 1e-10
    # golden-section on the symmetry-reduced function
    assert symmetric_pair_distance(k) == pytest.approx(oracles["pair_dstar"]["1.5"], abs=1e-11)


def test_orbit_deduplication_and_raw_mode(oracles):
    k = disc(1.0, 1.5)
    seeds = default_seeds(k, [1.0, 1.0], grid=4, max_seeds=30)
    found = find_critical_points(k, seeds)
    assert len(found) == 1
    raw = find_critical_points(k, seeds, modulo_symmetry=False)
    assert len(raw) >= 1
    for cp in raw:
        assert np.linalg.norm(cp.config.points[0]) == pytest.approx(oracles["pair_dstar"]["1.5"], abs=1e-8)


def test_canonical_rotation_preserves_w():
    k = disc(1.0, 1.5)
    c = VortexConfiguration([[0.2, 0.5], [-0.1, -0.3]], [1.0, 2.0])
    r = canonical_rotation(c)
    assert w_m(k, r) == pytest.approx(w_m(k, c), rel=1e-13)
    assert r.points[0, 1] == 0.0 and r.points[0, 0] > 0


def test_relabelling_invariance():
    k = disc(1.0, 1.5)
    p = np.array([[0.2, 0.5], [-0.1, -0.3], [0.4, -0.4]])
    s = np.array([1.0, 2.0, 0.5])
    perm = [2, 0, 1]
    assert w_m(k, VortexConfiguration(p, s)) == pytest.approx(w_m(k, VortexConfiguration(p[perm], s[perm])),
                                                              rel=1e-15)


def test_free_space_translation_invariance():
    k = free_space(1.5)
    p = np.array([[0.2, 0.5], [-0.1, -0.3]])
    c = VortexConfiguration(p, [1.0, 2.0])
    assert w_m(k, c.with_points(p + 3.7)) == pytest.approx(w_m(k, c), rel=1e-12)


def test_nonconverged_seeds_are_reported():
    k = disc(1.0, 1.5)
    seeds = [VortexConfiguration([[0.3, 0.0]], [1.0])]
    found, reports = find_critical_points(k, seeds, max_iter=1, return_reports=True)
    assert len(reports) == 1
    with pytest.raises(DomainError):
        find_critical_points(k, seeds, tol=0.0)
