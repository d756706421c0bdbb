"""Regenerate ``oracles.json`` with mpmath (independent of the package).

Run from the repository root::

    python3 tests/fixtures/generate_fixtures.py

Every value is computed at 30 significant digits either by direct
numerical integration of a defining integral (tanh-sinh quadrature) or by
an integral representation different from the one used in the package.
"""
from __future__ import annotations

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 30

GAMMAS = ["1.25", "1.5", "1.75"]
OUT = Path(__file__).with_name("oracles.json")


def c_gamma(g):
    return 2 ** (g - 1) * mp.gamma(g / 2) / mp.gamma(1 - g / 2)


def sigma_closed(j, g):
    if j == 1:
        return mp.mpf(0)
    a = g / 2
    pref = 2 ** (g - 1) * mp.gamma(1 - g) / mp.gamma(1 - a) ** 2
    return pref * (mp.gamma(1 + a) / mp.gamma(2 - a) - mp.gamma(j + a) / mp.gamma(1 + j - a))


def sigma_quadrature(j, g):
    """Coefficient of sin(j b) in the zero-size linearisation applied to cos(j b), divided by j.

    The linearisation (unit radius) is
    C [ (1 - g/2) avg h(b - e) sin(e) A^(-g/2) - avg (h'(b) - h'(b - e)) cos(e) A^(-g/2) ]
    with A = 4 sin^2(e/2) and avg = (1/2pi) int_0^{2pi}.  Evaluated at
    b = pi/(2j) where sin(j b) = 1.
    """
    b = mp.pi / (2 * j)

    def h(x):
        return mp.cos(j * x)

    def dh(x):
        return -j * mp.sin(j * x)

    def f(e):
        kern = (4 * mp.sin(e / 2) ** 2) ** (-g / 2)
        return ((1 - g / 2) * h(b - e) * mp.sin(e) - (dh(b) - dh(b - e)) * mp.cos(e)) * kern

    pts = [0] + [mp.pi * k / j for k in range(1, 2 * j)] + [2 * mp.pi]
    val = mp.quad(f, pts) / (2 * mp.pi)
    return c_gamma(g) * val / j


def trig_moment(j, g):
    """int_0^pi sin(t)^(2-g) exp(2 i j t) dt by quadrature."""
    pts = [0] + [mp.pi * k / max(1, 2 * j) for k in range(1, max(1, 2 * j))] + [mp.pi]
    re = mp.quad(lambda t: mp.sin(t) ** (2 - g) * mp.cos(2 * j * t), pts)
    im = mp.quad(lambda t: mp.sin(t) ** (2 - g) * mp.sin(2 * j * t), pts)
    return re, im


def cos_diff(j, g):
    """(1/2pi) int_0^{2pi} (1 - cos(j e)) |sin(e/2)|^(-g) de."""
    pts = [0] + [mp.pi * k / j for k in range(1, 2 * j)] + [2 * mp.pi]
    return mp.quad(lambda e: (1 - mp.cos(j * e)) * abs(mp.sin(e / 2)) ** (-g), pts) / (2 * mp.pi)


def disc_green_riesz(x, y, g):
    """Riesz representation: norm * d^(2s-2) int_0^{r0} t^(s-1)/(1+t) dt, s = 1 - g/2."""
    s = 1 - g / 2
    d2 = (x[0] - y[0]) ** 2 + (x[1] - y[1]) ** 2
    p = (1 - x[0] ** 2 - x[1] ** 2) * (1 - y[0] ** 2 - y[1] ** 2)
    r0 = p / d2
    norm = c_gamma(g) * mp.sin(mp.pi * s) / mp.pi
    # t = u^(1/s) removes the endpoint singularity: t^(s-1) dt = du / s
    upper = r0 ** s
    inner = mp.quad(lambda u: 1 / (1 + u ** (1 / s)), [0, min(1, upper), upper] if upper > 1 else [0, upper]) / s
    return norm * d2 ** (s - 1) * inner


def k0_diag(x, g):
    """Diagonal limit of G - C d^(-g): -C sin(pi s)/(pi (1-s)) (1-|x|^2)^(-g)."""
    s = 1 - g / 2
    r2 = x[0] ** 2 + x[1] ** 2
    return -c_gamma(g) * mp.sin(mp.pi * s) / (mp.pi * (1 - s)) * (1 - r2) ** (-g)


def pair_w(d, g):
    """W_2 for unit strengths at (+-d, 0) in the unit disc."""
    return -2 * c_gamma(g) * (2 * d) ** (-g) + 2 * k0_diag((d, 0), g)


def pair_dstar(g):
    return mp.findroot(lambda d: mp.diff(lambda t: pair_w(t, g), d), mp.mpf("0.6"))


def f(x):
    return float(x)


def main():
    out = {"_meta": {"generator": "tests/fixtures/generate_fixtures.py", "mpmath_dps": mp.mp.dps}}
    out["gamma_fn"] = {z: f(mp.gamma(mp.mpf(z))) for z in ["0.25", "0.5", "1.5", "-0.5", "-1.25", "3.7", "0.001"]}
    out["c_gamma"] = {g: f(c_gamma(mp.mpf(g))) for g in ["0.5", "1.1", "1.25", "1.5", "1.75", "1.9"]}
    out["sigma_closed"] = {g: {str(j): f(sigma_closed(j, mp.mpf(g))) for j in list(range(1, 21)) + [50, 100, 400]}
                           for g in GAMMAS}
    out["sigma_quadrature"] = {g: {str(j): f(sigma_quadrature(j, mp.mpf(g))) for j in range(2, 9)} for g in GAMMAS}
    out["trig_moment"] = {}
    for g in ["0.5"] + GAMMAS:
        out["trig_moment"][g] = {}
        for j in range(0, 11):
            re, im = trig_moment(j, mp.mpf(g))
            out["trig_moment"][g][str(j)] = [f(re), f(im)]
    out["cos_diff_multiplier"] = {g: {str(j): f(cos_diff(j, mp.mpf(g))) for j in range(1, 9)} for g in GAMMAS}
    pairs = [((0.1, 0.2), (-0.3, 0.4)), ((0.5, 0.0), (0.0, 0.5)), ((0.7, -0.1), (0.6, 0.05)), ((0.0, 0.0), (0.2, 0.1))]
    out["disc_green"] = {}
    out["disc_k0"] = {}
    for g in GAMMAS:
        gm = mp.mpf(g)
        rows, k0rows = [], []
        for x, y in pairs:
            xm, ym = [mp.mpf(v) for v in x], [mp.mpf(v) for v in y]
            gval = disc_green_riesz(xm, ym, gm)
            d = mp.sqrt((xm[0] - ym[0]) ** 2 + (xm[1] - ym[1]) ** 2)
            rows.append({"x": list(x), "y": list(y), "value": f(gval)})
            k0rows.append({"x": list(x), "y": list(y), "value": f(gval - c_gamma(gm) * d ** (-gm))})
        for x in [(0.0, 0.0), (0.3, 0.0), (0.2, -0.5), (0.0, 0.9)]:
            xm = [mp.mpf(v) for v in x]
            k0rows.append({"x": list(x), "y": list(x), "value": f(k0_diag(xm, gm))})
        out["disc_green"][g] = rows
        out["disc_k0"][g] = k0rows
    out["pair_w"] = {g: {d: f(pair_w(mp.mpf(d), mp.mpf(g))) for d in ["0.3", "0.6", "0.8"]} for g in GAMMAS}
    out["pair_dstar"] = {g: f(pair_dstar(mp.mpf(g))) for g in GAMMAS}
    OUT.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
