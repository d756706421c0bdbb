"""Multipliers of the zero-size linearisation and the inverse bound.

Prints sigma_j for a few exponents, checks two of them against direct
quadrature of the linearised operator, and shows that the inverse is
bounded from Y0 (order k - 1) into X (order k) uniformly in N.

Run:  python3 demos/spectrum.py
"""
import numpy as np

from gsqg_patches.contour import FourierContour, norm_X, norm_Y
from gsqg_patches.linop import SpectralOperator, apply_L0_quadrature, invert_L0
from gsqg_patches.special import sigma_spectrum

print("j    " + "  ".join(f"gamma={g:<5}" for g in (1.25, 1.5, 1.75)))
tables = [sigma_spectrum(10, g) for g in (1.25, 1.5, 1.75)]
for j in range(1, 11):
    print(f"{j:<4} " + "  ".join(f"{t[j]:<11.6f}" for t in tables))

beta = np.linspace(0, 2 * np.pi, 8, endpoint=False) + 0.1
for j in (3, 7):
    q = apply_L0_quadrature(FourierContour.from_modes(j, cos={j: 1.0}), None, beta, 1.0, 1.5)
    lam = sigma_spectrum(j, 1.5)[j] * j
    print(f"j={j}: max |quadrature / (j sigma_j sin j b) - 1| = {np.max(np.abs(q / (lam * np.sin(j * beta)) - 1)):.1e}")

rng = np.random.default_rng(0)
for n in (16, 64, 256):
    op = SpectralOperator(1.5, [1.0], n)
    r = []
    for _ in range(50):
        k = np.arange(2, n + 1)
        p = FourierContour(rng.normal(size=n - 1) / k ** 3, rng.normal(size=n - 1) / k ** 3)
        r.append(norm_X(invert_L0(op, 0, p), 3, 1.5) / norm_Y(p, 2))
    print(f"N={n:<4} max |L^-1 p|_X / |p|_Y0 = {max(r):.4f}")
