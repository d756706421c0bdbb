"""Kirchhoff-Routh function of point vortices in a domain.

    W_m(x) = - sum_{i != j} kappa_i kappa_j K1(x_i, x_j) + sum_i kappa_i^2 K0(x_i, x_i)

(both ordered pairs are counted in the first sum).  Its critical points are
the admissible centers of the zero-size patches; nondegeneracy of the
Hessian certifies a nonzero local degree.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import DomainError, SingularityError
from .green import GreenKernel

__all__ = [
    "VortexConfiguration",
    "CriticalPoint",
    "w_m",
    "grad_w_m",
    "hess_w_m",
    "find_critical_points",
    "default_seeds",
    "symmetric_pair_distance",
    "reduced_hessian",
    "canonical_rotation",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class VortexConfiguration:
    """Point vortices ``x_i`` with strengths ``kappa_i > 0``.

    Attributes
    ----------
    points : numpy.ndarray, shape (m, 2)
    strengths : numpy.ndarray, shape (m,)
    """

    points: np.ndarray
    strengths: np.ndarray

    def __post_init__(self):
        p = np.array(self.points, dtype=float).reshape(-1, 2)
        k = np.array(self.strengths, dtype=float).reshape(-1)
        if p.shape[0] != k.size:
            raise DomainError("number of points and strengths differ")
        if not np.all(k > 0):
            raise DomainError("strengths must be positive")
        for i, j in itertools.combinations(range(k.size), 2):
            if np.all(p[i] == p[j]):
                raise SingularityError(f"points {i} and {j} coincide")
        p.setflags(write=False)
        k.setflags(write=False)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "strengths", k)

    @property
    def m(self) -> int:
        return int(self.strengths.size)

    def with_points(self, points) -> "VortexConfiguration":
        return VortexConfiguration(points, self.strengths)


def _check(kernel: GreenKernel, config: VortexConfiguration):
    kernel.check_inside(config.points)


def w_m(kernel: GreenKernel, config: VortexConfiguration) -> float:
    """Kirchhoff-Routh function.

    Raises
    ------
    DomainError
        If a point lies outside the domain.
    SingularityError
        If two points coincide.
    """
    _check(kernel, config)
    p, k = config.points, config.strengths
    total = 0.0
    for i in range(config.m):
        for j in range(config.m):
            if i != j:
                total -= k[i] * k[j] * float(kernel.k1(p[i], p[j]))
        total += k[i] ** 2 * float(kernel.k0(p[i], p[i]))
    return total


def grad_w_m(kernel: GreenKernel, config: VortexConfiguration) -> np.ndarray:
    """Gradient of :func:`w_m` as a flat vector ``(dx_1, dy_1, ..., dx_m, dy_m)``.

    The interaction part is differentiated analytically; the diagonal term
    uses ``d/dx K0(x, x) = 2 grad_x K0(x, x)`` (symmetry of ``K0``).
    """
    _check(kernel, config)
    p, k = config.points, config.strengths
    g = kernel.gamma
    c = kernel.gamma_param.c_gamma
    out = np.zeros((config.m, 2))
    for i in range(config.m):
        for j in range(config.m):
            if i == j:
                continue
            d = p[i] - p[j]
            r2 = float(d @ d)
            out[i] += 2.0 * g * c * k[i] * k[j] * d / r2 ** (0.5 * g + 1.0)
        out[i] += 2.0 * k[i] ** 2 * kernel.grad_x_k0(p[i], p[i])
    return out.reshape(-1)


def hess_w_m(kernel: GreenKernel, config: VortexConfiguration, h: float | None = None,
             symmetrize: bool = True) -> np.ndarray:
    """Hessian of :func:`w_m` by central differences of :func:`grad_w_m`.

    Parameters
    ----------
    h : float, optional
        Step (default ``1e-4 * kernel.radius``).
    symmetrize : bool
        Return ``(H + H^T)/2``.
    """
    h = 1e-4 * kernel.radius if h is None else float(h)
    x0 = config.points.reshape(-1)
    n = x0.size
    hess = np.empty((n, n))
    for col in range(n):
        e = np.zeros(n)
        e[col] = h
        gp = grad_w_m(kernel, config.with_points((x0 + e).reshape(-1, 2)))
        gm = grad_w_m(kernel, config.with_points((x0 - e).reshape(-1, 2)))
        hess[:, col] = (gp - gm) / (2.0 * h)
    return 0.5 * (hess + hess.T) if symmetrize else hess


def reduced_hessian(kernel: GreenKernel, points, hess: np.ndarray) -> np.ndarray:
    """Hessian restricted to the orthogonal complement of the domain symmetries."""
    gens = [gvec.reshape(-1) for gvec in kernel.symmetry_generators(np.asarray(points).reshape(-1, 2))]
    n = hess.shape[0]
    if not gens:
        return hess
    q, _ = np.linalg.qr(np.stack(gens, axis=1), mode="complete")
    basis = q[:, len(gens):n]
    return basis.T @ hess @ basis


@dataclass
class CriticalPoint:
    """Outcome of a critical-point search from one seed.

    Attributes
    ----------
    config : VortexConfiguration
    nondegenerate : bool
        ``|det H| > 1e-10``.
    index : int
        Number of negative Hessian eigenvalues.
    reduced_nondegenerate : bool
        Nondegeneracy after factoring out continuous domain symmetries.
    reduced_index : int
        Number of negative eigenvalues of the reduced Hessian.
    grad_norm : float
    hessian_eigenvalues : numpy.ndarray
    iterations : int
    converged : bool
    seed_index : int
    """

    config: VortexConfiguration
    nondegenerate: bool
    index: int
    reduced_nondegenerate: bool = False
    grad_norm: float = float("nan")
    hessian_eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    converged: bool = True
    seed_index: int = -1
    message: str = ""
    reduced_index: int = -1

    def __iter__(self):
        # allows ``config, nondegenerate, index = point``
        return iter((self.config, self.nondegenerate, self.index))


def _classify(kernel, config, gnorm, it, seed_index, converged, message=""):
    hess = hess_w_m(kernel, config)
    eig = np.linalg.eigvalsh(hess)
    det = float(np.prod(eig))
    red = reduced_hessian(kernel, config.points, hess)
    red_eig = np.linalg.eigvalsh(red) if red.size else np.zeros(0)
    scale = max(1.0, float(np.max(np.abs(eig))))
    return CriticalPoint(
        config=config,
        nondegenerate=bool(abs(det) > 1e-10),
        index=int(np.sum(eig < 0)),
        reduced_nondegenerate=bool(red_eig.size > 0 and np.min(np.abs(red_eig)) > 1e-8 * scale),
        grad_norm=gnorm,
        hessian_eigenvalues=eig,
        iterations=it,
        converged=converged,
        seed_index=seed_index,
        message=message,
        reduced_index=int(np.sum(red_eig < 0)),
    )


def _newton(kernel, config, tol, max_iter, max_backtracks=30):
    x = config.points.reshape(-1).copy()

    def gnorm_at(xv):
        try:
            cfg = config.with_points(xv.reshape(-1, 2))
            return cfg, float(np.linalg.norm(grad_w_m(kernel, cfg)))
        except (DomainError, SingularityError):
            return None, np.inf

    cfg, gn = gnorm_at(x)
    if cfg is None:
        return config, np.inf, 0, False, "seed outside the domain"
    for it in range(1, max_iter + 1):
        if gn <= tol:
            return cfg, gn, it - 1, True, ""
        grad = grad_w_m(kernel, cfg)
        hess = hess_w_m(kernel, cfg)
        step = np.linalg.lstsq(hess, -grad, rcond=None)[0]
        t = 1.0
        for _ in range(max_backtracks):
            c_new, g_new = gnorm_at(x + t * step)
            if g_new < gn:
                break
            t *= 0.5
        else:
            return cfg, gn, it, False, "backtracking failed"
        x = x + t * step
        cfg, gn = c_new, g_new
    return cfg, gn, max_iter, gn <= tol, "" if gn <= tol else "maximum iterations reached"


def _same(a: VortexConfiguration, b: VortexConfiguration, dist: float) -> bool:
    if a.m != b.m:
        return False
    for perm in itertools.permutations(range(a.m)):
        if np.array_equal(a.strengths[list(perm)], b.strengths) and np.max(
                np.linalg.norm(a.points[list(perm)] - b.points, axis=1)) < dist:
            return True
    return False


def canonical_rotation(config: VortexConfiguration) -> VortexConfiguration:
    """Rotate about the origin so that the outermost point lies on the positive x-axis.

    Ties in radius (to 1e-9) go to the lowest index.  Used to pick one
    representative per rotation orbit in the disc.
    """
    p = config.points
    r = np.round(np.hypot(p[:, 0], p[:, 1]), 9)
    k = int(np.argmax(r))
    if r[k] == 0.0:
        return config
    phi = -math.atan2(p[k, 1], p[k, 0])
    c, s = math.cos(phi), math.sin(phi)
    rot = p @ np.array([[c, s], [-s, c]])
    rot[k, 1] = 0.0
    return config.with_points(rot)


def find_critical_points(kernel: GreenKernel, seeds, tol: float = 1e-10, max_iter: int = 50,
                         return_reports: bool = False, modulo_symmetry: bool = True):
    """Damped Newton search for critical points of :func:`w_m`.

    Parameters
    ----------
    kernel : GreenKernel
    seeds : iterable of VortexConfiguration
    tol : float
        Convergence threshold on ``|grad W_m|``.
    max_iter : int
    return_reports : bool
        Also return the per-seed reports (including non-converged seeds).
    modulo_symmetry : bool
        In the disc, critical configurations of two or more points come in
        rotation orbits; with this flag each converged point is rotated to
        :func:`canonical_rotation` form before deduplication, so one
        representative per orbit is returned.

    Returns
    -------
    list of CriticalPoint
        Converged, deduplicated (distance ``< 1e-6`` up to relabelling of
        equal strengths), sorted by position.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    found: list[CriticalPoint] = []
    reports: list[CriticalPoint] = []
    for s_idx, seed in enumerate(seeds):
        cfg, gn, it, ok, msg = _newton(kernel, seed, tol, max_iter)
        if not ok:
            reports.append(CriticalPoint(cfg, False, -1, False, gn, np.zeros(0), it, False, s_idx, msg))
            log.debug("seed %d did not converge: %s", s_idx, msg)
            continue
        if modulo_symmetry and kernel.domain_tag == "disc" and cfg.m >= 2:
            cfg = canonical_rotation(cfg)
            gn = float(np.linalg.norm(grad_w_m(kernel, cfg)))
        point = _classify(kernel, cfg, gn, it, s_idx, True)
        reports.append(point)
        if not any(_same(point.config, f.config, 1e-6) for f in found):
            found.append(point)
    found.sort(key=lambda c: tuple(np.round(c.config.points.reshape(-1), 9)))
    return (found, reports) if return_reports else found


def default_seeds(kernel: GreenKernel, strengths, grid: int = 5, shrink: float = 0.8,
                  min_separation: float = 0.1, max_seeds: int | None = 400) -> list[VortexConfiguration]:
    """Tensor-grid seeds over a shrunken domain with collision filtering.

    For the disc the grid covers ``|x| <= shrink * radius``; for the plane
    the square ``[-1, 1]^2``.
    """
    k = np.asarray(strengths, dtype=float).reshape(-1)
    r = shrink * kernel.radius
    ax = np.linspace(-r, r, grid)
    pts = np.array([(x, y) for x in ax for y in ax])
    if kernel.domain_tag == "disc":
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= r + 1e-12]
    seeds = []
    for combo in itertools.permutations(range(len(pts)), k.size):
        p = pts[list(combo)]
        if k.size > 1:
            d = min(np.linalg.norm(p[a] - p[b]) for a, b in itertools.combinations(range(k.size), 2))
            if d < min_separation * kernel.radius:
                continue
        seeds.append(VortexConfiguration(p, k))
    if max_seeds is not None and len(seeds) > max_seeds:
        idx = np.linspace(0, len(seeds) - 1, max_seeds).round().astype(int)
        seeds = [seeds[i] for i in idx]
    return seeds


def symmetric_pair_distance(kernel: GreenKernel, kappa: float = 1.0, xtol: float = 1e-12) -> float:
    """Half-separation ``d*`` of the critical symmetric pair ``(+-d, 0)``.

    Root of ``d -> dW_2/dd`` for the pair ``(d, 0), (-d, 0)`` (Brent's
    method on the analytic gradient, bracketed by a golden-section estimate
    of the maximum of the reduced function).  Locating the root of the
    derivative rather than the maximiser avoids the ``sqrt(machine eps)``
    accuracy limit of minimising a flat function.
    """
    if kernel.domain_tag != "disc":
        raise DomainError("the symmetric pair reduction needs a bounded disc")
    r = kernel.radius

    def config(d):
        return VortexConfiguration([[d, 0.0], [-d, 0.0]], [kappa, kappa])

    def f(d):
        return -w_m(kernel, config(d))

    def df(d):
        g = grad_w_m(kernel, config(d))
        return g[0] - g[2]

    guess = optimize.minimize_scalar(f, bracket=(0.2 * r, 0.5 * r, 0.9 * r), method="golden",
                                     options={"xtol": 1e-6}).x
    lo, hi = guess - 1e-3 * r, guess + 1e-3 * r
    return float(optimize.brentq(df, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps))
