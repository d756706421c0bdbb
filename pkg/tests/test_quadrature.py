import math

import numpy as np
import pytest
from scipy import integrate

from gsqg_patches.quadrature import graded_integrate, graded_panels, graded_rule, periodic_singular_rule, shifted_grid
from gsqg_patches.special import cos_diff_multiplier


def test_shifted_grid_avoids_zero():
    eta = shifted_grid(8)
    assert eta[0] == pytest.approx(np.pi / 8)
    assert np.all((eta > 0) & (eta < 2 * np.pi))


@pytest.mark.parametrize("m", [3, 5, 2])
def test_periodic_rule_needs_even_size(m):
    with pytest.raises(ValueError):
        periodic_singular_rule(m, 1.5)


@pytest.mark.parametrize("gamma", [1.25, 1.5, 1.75])
@pytest.mark.parametrize("j", [1, 3, 7])
def test_periodic_rule_reproduces_difference_multiplier(gamma, j):
    # int (1 - cos j e) |2 sin(e/2)|^-g de = 2 pi m_j 2^-g
    eta, w = periodic_singular_rule(64, gamma)
    got = np.sum(w * (1 - np.cos(j * eta)))
    ref = 2 * np.pi * cos_diff_multiplier(j, gamma) * 2.0 ** -gamma
    assert got == pytest.approx(ref, rel=1e-12)


def test_periodic_rule_weights_mirror_symmetric():
    _, w = periodic_singular_rule(32, 1.5)
    assert np.allclose(w, w[::-1], rtol=0, atol=0)


def test_graded_panels_geometric():
    edges = graded_panels(1.0, 5, 0.5)
    lengths = np.diff(edges)
    assert np.all(lengths > 0)


@pytest.mark.parametrize("p", [-0.5, 0.0, 0.3])
def test_graded_rule_algebraic_endpoints_positive_interval(p):
    # int_0^{2pi} (e (2 pi - e))^p de against scipy's algebraic-weight QUADPACK rule
    got = graded_integrate(lambda e: (e * (2 * np.pi - e)) ** p, levels=16, exponent=p, interval="positive")
    ref = integrate.quad(lambda e: 1.0, 0, 2 * np.pi, weight="alg", wvar=(p, p))[0]
    assert got == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("p", [-0.25, -0.75, -0.9])
def test_graded_rule_periodic_singularity(p):
    # int_{-pi}^{pi} |2 sin(e/2)|^p de = 2^(p+1) sqrt(pi) Gamma((p+1)/2) / Gamma(p/2 + 1)
    got = graded_integrate(lambda e: np.abs(2 * np.sin(0.5 * e)) ** p, levels=40, exponent=p)
    ref = 2.0 ** (p + 1) * math.sqrt(math.pi) * math.gamma(0.5 * (p + 1)) / math.gamma(0.5 * p + 1)
    assert got == pytest.approx(ref, rel=1e-10)


def test_graded_rule_symmetric_nodes_keep_precision():
    eta, _ = graded_rule(12, 0.5, 8, exponent=-0.9)
    assert np.all(eta != 0.0)
    assert np.all(np.abs(eta) < np.pi)
    # innermost nodes are resolved on both sides of the singular point
    assert np.min(eta[eta > 0]) == pytest.approx(-np.max(eta[eta < 0]))


def test_graded_rule_unknown_interval():
    with pytest.raises(ValueError):
        graded_rule(interval="left")


def test_graded_rule_rejects_nonintegrable_exponent():
    with pytest.raises(ValueError):
        graded_rule(exponent=-1.0)


def test_graded_rule_integrates_trig_polynomials():
    eta, w = graded_rule()
    assert np.sum(w) == pytest.approx(2 * np.pi, rel=1e-13)
    assert np.sum(w * np.sin(3 * eta) ** 2) == pytest.approx(np.pi, rel=1e-13)
    assert np.sum(w * np.cos(5 * eta)) == pytest.approx(0.0, abs=1e-12)
