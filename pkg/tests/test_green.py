import numpy as np
import pytest

from gsqg_patches.errors import DomainError, SingularityError
from gsqg_patches.green import disc, disc_green, free_space, k1, make_kernel
from gsqg_patches.special import c_gamma

GAMMAS = ["1.25", "1.5", "1.75"]


def test_k1_value_and_singularity():
    assert k1([0.0, 0.0], [0.3, 0.4], 1.5) == pytest.approx(c_gamma(1.5) * 0.5 ** -1.5)
    with pytest.raises(SingularityError):
        k1([0.1, 0.1], [0.1, 0.1], 1.5)


@pytest.mark.parametrize("g", GAMMAS)
def test_disc_green_matches_riesz_representation(oracles, g):
    for row in oracles["disc_green"][g]:
        assert disc_green(row["x"], row["y"], float(g)) == pytest.approx(row["value"], rel=1e-11)


@pytest.mark.parametrize("g", GAMMAS)
def test_disc_k0_matches_oracle_including_diagonal(oracles, g):
    k = disc(1.0, float(g))
    for row in oracles["disc_k0"][g]:
        assert k.k0(row["x"], row["y"]) == pytest.approx(row["value"], rel=1e-11)


def test_green_splits_into_k1_plus_k0():
    k = disc(1.0, 1.5)
    x, y = np.array([0.2, -0.1]), np.array([-0.4, 0.3])
    assert k.green(x, y) == pytest.approx(k.k1(x, y) + k.k0(x, y), rel=1e-13)


def test_k0_symmetric_and_negative():
    k = disc(1.0, 1.5)
    x, y = np.array([0.2, -0.1]), np.array([-0.4, 0.3])
    assert k.k0(x, y) == pytest.approx(k.k0(y, x), rel=1e-14)
    assert k.k0(x, y) < 0


def test_green_vanishes_at_boundary_like_distance_power():
    # G(x, y) ~ dist(y)^(1 - gamma/2) as y approaches the boundary
    k = disc(1.0, 1.5)
    x = np.array([0.1, 0.2])
    near = k.green(x, np.array([1.0 - 1e-8, 0.0]))
    nearer = k.green(x, np.array([1.0 - 1e-12, 0.0]))
    assert near / nearer == pytest.approx(10.0, rel=1e-3)


def test_disc_radius_scaling():
    # G_R(x, y) = R^(-gamma) G_1(x/R, y/R)
    k1_, k2_ = disc(1.0, 1.5), disc(2.0, 1.5)
    x, y = np.array([0.3, 0.1]), np.array([-0.2, 0.5])
    assert k2_.k0(2 * x, 2 * y) == pytest.approx(2.0 ** -1.5 * k1_.k0(x, y), rel=1e-13)


def test_outside_points_rejected():
    k = disc(1.0, 1.5)
    with pytest.raises(DomainError):
        k.k0([1.2, 0.0], [0.0, 0.0])


@pytest.mark.parametrize("point", [[0.0, 0.0], [0.3, -0.2], [0.0, 0.85]])
def test_grad_k0_analytic_vs_finite_difference(point):
    k = disc(1.0, 1.5)
    x = np.array(point)
    y = np.array([0.1, 0.25])
    a = k.grad_x_k0(x, y, method="analytic")
    b = k.grad_x_k0(x, y, method="fd")
    assert np.allclose(a, b, rtol=1e-7, atol=1e-9)


def test_grad_k0_on_diagonal():
    k = disc(1.0, 1.5)
    x = np.array([0.4, -0.2])
    a = k.grad_x_k0(x, x, method="analytic")
    b = k.grad_x_k0(x, x, method="fd")
    assert np.allclose(a, b, rtol=1e-7, atol=1e-9)


def test_free_space_kernel():
    k = free_space(1.5)
    assert k.k0([0.1, 0.0], [5.0, 2.0]) == 0.0
    assert np.all(k.grad_x_k0(np.array([0.1, 0.0]), np.array([0.1, 0.0])) == 0.0)
    gens = k.symmetry_generators(np.array([[0.1, 0.2], [0.3, 0.0]]))
    assert len(gens) == 3


def test_disc_symmetry_generators():
    k = disc(1.0, 1.5)
    assert k.symmetry_generators(np.array([[0.0, 0.0]])) == []
    (rot,) = k.symmetry_generators(np.array([[0.5, 0.0], [-0.5, 0.0]]))
    assert np.allclose(rot, [[0.0, 0.5], [0.0, -0.5]])


def test_make_kernel():
    assert make_kernel("disc", 1.5).domain_tag == "disc"
    assert make_kernel("free", 1.5).domain_tag == "free"
    with pytest.raises(DomainError):
        make_kernel("square", 1.5)
