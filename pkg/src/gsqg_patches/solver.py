"""Newton iteration, continuation in the patch size and post-solve checks.

The unknowns are the shape coefficients of every patch and the centers; the
base radii are eliminated through the flux constraint.  When the domain has
continuous symmetries (rotations of the disc, rigid motions of the plane)
the Jacobian is singular along the symmetry orbit; a phase condition
``p . (u - u_ref) = 0`` per generator ``p`` is then appended and the
overdetermined system is solved in the least-squares sense.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .contour import centroid, enclosed_area, norm_Y, radius, signed_curvature
from .errors import ConvergenceError, DomainError, GeometryError, GsqgError, InfeasibleFluxError, SingularJacobianError
from .functional import eval_terms
from .kr import CriticalPoint, VortexConfiguration
from .linop import assemble_jacobian
from .system import ContinuationState, Problem, assemble_rows, residual_parts, residual_vector

__all__ = [
    "ContinuationState",
    "Problem",
    "NewtonReport",
    "ContinuationResult",
    "residual",
    "residual_terms",
    "symmetry_directions",
    "newton_solve",
    "continue_in_eps",
    "default_eps_max",
    "default_rho0",
    "verify_solution",
]

log = logging.getLogger(__name__)


def residual(state: ContinuationState, problem: Problem) -> np.ndarray:
    """Projected residual of the stationary-patch system (see :mod:`gsqg_patches.system`)."""
    return residual_vector(state, problem)


def residual_terms(state: ContinuationState, problem: Problem) -> dict:
    """Residual norms of ``G_{i,1}``, ``G_{i,2}``, ``G_{i,3}`` separately (projected, per patch)."""
    _, terms = residual_parts(state, problem, check=False)
    out = {}
    for t, name in enumerate(("G1", "G2", "G3")):
        rows = assemble_rows(terms[:, t, :], state.n)
        out[name] = float(np.linalg.norm(rows))
    out["total"] = float(np.linalg.norm(assemble_rows(terms.sum(axis=1), state.n)))
    return out


def symmetry_directions(state: ContinuationState, problem: Problem, tol: float = 1e-12) -> list[np.ndarray]:
    """Generators of the domain symmetries lifted to the unknown space.

    A rotation by ``phi`` maps ``g_i(b) -> g_i(b - phi)`` and rotates the
    centers; translations (plane only) leave the shapes unchanged.
    """
    gens = problem.kernel.symmetry_generators(state.centers)
    # the disc kernel omits its rotation when the centers sit at the origin,
    # but the shapes may still rotate
    if problem.kernel.domain_tag == "disc" and not gens:
        gens = [np.zeros_like(state.centers)]
    out = []
    for g in gens:
        g = np.asarray(g, dtype=float)
        rot_like = np.allclose(g, np.stack([-state.centers[:, 1], state.centers[:, 0]], -1))
        parts = []
        for s in state.shapes:
            if rot_like:
                j = s.modes.astype(float)
                parts.append(np.concatenate([-j * s.b, j * s.a]))
            else:
                parts.append(np.zeros(s.vector.size))
        vec = np.concatenate(parts + [g.reshape(-1)])
        nrm = np.linalg.norm(vec)
        if nrm > tol:
            out.append(vec / nrm)
    return out


@dataclass
class NewtonReport:
    """Convergence record of one Newton solve.

    Attributes
    ----------
    converged : bool
    iterations : int
    residual_norms : list of float
        ``|r|`` before the first step and after every step.
    step_norms : list of float
    condition : list of float
        Condition-number estimates of the Newton matrices.
    gauge : int
        Number of phase conditions used.
    message : str
    best_state : ContinuationState or None
    """

    converged: bool = False
    iterations: int = 0
    residual_norms: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    condition: list = field(default_factory=list)
    gauge: int = 0
    message: str = ""
    best_state: ContinuationState | None = None

    def as_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "residual_norms": [float(x) for x in self.residual_norms],
            "step_norms": [float(x) for x in self.step_norms],
            "condition": [float(x) for x in self.condition],
            "gauge_conditions": self.gauge,
            "message": self.message,
        }


def _solve_step(jac, r, gauge_rows, gauge_rhs, report):
    if gauge_rows is not None:
        a = np.vstack([jac, gauge_rows])
        b = -np.concatenate([r, gauge_rhs])
        step, _, rank, sv = np.linalg.lstsq(a, b, rcond=None)
        cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
        report.condition.append(cond)
        if rank < a.shape[1]:
            raise SingularJacobianError(f"augmented Newton matrix is rank deficient (rank {rank}, condition {cond:.3g})",
                                        report)
        return step
    try:
        lu, piv = sla.lu_factor(jac, check_finite=True)
    except (ValueError, sla.LinAlgError) as exc:
        raise SingularJacobianError(f"Newton matrix could not be factorised: {exc}", report) from exc
    rcond = float(np.min(np.abs(np.diag(lu))) / max(np.max(np.abs(np.diag(lu))), 1e-300))
    report.condition.append(1.0 / rcond if rcond > 0 else np.inf)
    if not rcond > 1e-14:
        raise SingularJacobianError(f"Newton matrix is numerically singular (pivot ratio {rcond:.3g})", report)
    return sla.lu_solve((lu, piv), -r)


def newton_solve(state: ContinuationState, problem: Problem, tol: float = 1e-10, max_iter: int = 10,
                 gauge: str = "auto", u_ref=None, jacobian: str = "semi-analytic",
                 strategy: str = "coupled") -> tuple[ContinuationState, NewtonReport]:
    """Newton iteration on the projected residual.

    Parameters
    ----------
    state : ContinuationState
        Initial iterate.
    problem : Problem
    tol : float
        Stop when ``|r| <= tol``.
    max_iter : int
    gauge : {"auto", "none"}
        ``"auto"`` appends one phase condition per symmetry generator.
    u_ref : array_like, optional
        Reference point of the phase conditions (default: the initial iterate).
    jacobian : {"semi-analytic", "fd"}
    strategy : {"coupled", "nested"}
        ``"coupled"`` solves shapes and centers together; ``"nested"``
        alternates a center update (center rows) and a shape update (shape
        rows), mimicking the two-stage implicit-function argument.

    Returns
    -------
    state : ContinuationState
    report : NewtonReport

    Raises
    ------
    SingularJacobianError
        If the Newton matrix is singular.
    ConvergenceError
        If ``max_iter`` is exhausted; ``report.best_state`` holds the best iterate.
    """
    report = NewtonReport()
    u = state.unknowns()
    u_ref = u.copy() if u_ref is None else np.asarray(u_ref, dtype=float)
    r = residual_vector(state, problem)
    rn = float(np.linalg.norm(r))
    report.residual_norms.append(rn)
    best = (rn, state)
    dirs = symmetry_directions(state, problem) if gauge == "auto" else []
    report.gauge = len(dirs)
    ns = state.m * 2 * (state.n - 1)
    while rn > tol:
        if report.iterations >= max_iter:
            report.message = f"no convergence in {max_iter} iterations (|r| = {rn:.3e})"
            report.best_state = best[1]
            raise ConvergenceError(report.message, report)
        jac = assemble_jacobian(state, problem, method=jacobian)
        p = np.stack(dirs) if dirs else None
        if strategy == "coupled":
            step = _solve_step(jac, r, p, None if p is None else p @ (u - u_ref), report)
        elif strategy == "nested":
            step = np.zeros_like(u)
            pc = None if p is None else p[:, ns:]
            keep = None if pc is None else np.linalg.norm(pc, axis=1) > 1e-12
            pc = pc[keep] if pc is not None and np.any(keep) else None
            step[ns:] = _solve_step(jac[ns:, ns:], r[ns:], pc, None if pc is None else pc @ (u - u_ref)[ns:], report)
            r_s = r[:ns] + jac[:ns, ns:] @ step[ns:]
            step[:ns] = _solve_step(jac[:ns, :ns], r_s, None, None, report)
        else:
            raise DomainError(f"unknown strategy {strategy!r}")
        t = 1.0
        for _ in range(12):
            try:
                cand = state.with_unknowns(u + t * step)
                r_new = residual_vector(cand, problem)
                break
            except (GeometryError, InfeasibleFluxError, DomainError):
                t *= 0.5
        else:
            report.message = "Newton step leaves the admissible set"
            report.best_state = best[1]
            raise ConvergenceError(report.message, report)
        state, u, r = cand, u + t * step, r_new
        rn = float(np.linalg.norm(r))
        report.iterations += 1
        report.step_norms.append(float(t * np.linalg.norm(step)))
        report.residual_norms.append(rn)
        if rn < best[0]:
            best = (rn, state)
        log.debug("newton it=%d |r|=%.3e |du|=%.3e", report.iterations, rn, report.step_norms[-1])
    report.converged = True
    report.best_state = state
    report.message = "converged"
    return state, report


def default_rho0(problem: Problem, centers) -> float:
    """Radius of the admissible center balls ``B_{rho0}(x0)``.

    ``0.24 x`` the minimal pairwise seed distance for ``m >= 2``; for a
    single patch ``0.25 x`` its distance to the boundary (``inf`` in the plane).
    """
    c = np.asarray(centers, dtype=float).reshape(-1, 2)
    if c.shape[0] >= 2:
        d = min(np.linalg.norm(c[i] - c[j]) for i in range(len(c)) for j in range(i + 1, len(c)))
        return 0.24 * float(d)
    return 0.25 * float(problem.kernel.boundary_distance(c[0]))


def default_eps_max(problem: Problem, centers) -> float:
    """``0.1 x (minimal separation) / max sqrt(kappa/pi)``.

    The separation is the minimal pairwise center distance, or twice the
    boundary distance for a single patch.
    """
    c = np.asarray(centers, dtype=float).reshape(-1, 2)
    if c.shape[0] >= 2:
        sep = min(np.linalg.norm(c[i] - c[j]) for i in range(len(c)) for j in range(i + 1, len(c)))
    else:
        sep = 2.0 * float(problem.kernel.boundary_distance(c[0]))
    if not np.isfinite(sep):
        return np.inf
    return 0.1 * sep / float(np.max(np.sqrt(problem.kappas / np.pi)))


@dataclass
class ContinuationResult:
    """States along the solution curve, one per accepted ``eps``.

    Attributes
    ----------
    states : list of ContinuationState
        Starts with the ``eps = 0`` state.
    reports : list of NewtonReport
    completed : bool
    message : str
    """

    states: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    completed: bool = False
    message: str = ""
    seed: np.ndarray | None = None
    rho0: float = float("nan")
    eps_max: float = float("nan")


def _admissible(state: ContinuationState, x0, rho0: float, k: int = 3):
    drift = np.linalg.norm(state.centers - x0, axis=1)
    if np.any(drift >= rho0):
        return f"center left the admissible ball: drift {float(np.max(drift)):.3e} >= rho0 {rho0:.3e}"
    total = sum(norm_Y(s, k) for s in state.shapes)
    if not total < 1.0:
        return f"shape norm constraint violated: sum |g_i|_(H^{k}) = {total:.3e} >= 1"
    return ""


def continue_in_eps(seed, problem: Problem, eps_targets, tol: float = 1e-10, max_iter: int = 10,
                    predictor: str = "trivial", eps_max: float | None = None, rho0: float | None = None,
                    jacobian: str = "semi-analytic", strategy: str = "coupled") -> ContinuationResult:
    """Follow the solution curve from a Kirchhoff-Routh critical point.

    Parameters
    ----------
    seed : CriticalPoint, VortexConfiguration or array_like of centers
    problem : Problem
    eps_targets : sequence of float
        Strictly increasing, positive, at most ``eps_max``.
    tol, max_iter : Newton controls.
    predictor : {"trivial", "secant"}
    eps_max, rho0 : float, optional
        Defaults from :func:`default_eps_max` and :func:`default_rho0`.

    Returns
    -------
    ContinuationResult
        Stops early (``completed = False``) on Newton failure after one
        bisection of the step, or when the admissible set is left.
    """
    if isinstance(seed, CriticalPoint):
        if not (seed.nondegenerate or seed.reduced_nondegenerate):
            raise DomainError("the seed critical point is degenerate")
        centers = seed.config.points
    elif isinstance(seed, VortexConfiguration):
        centers = seed.points
    else:
        centers = np.asarray(seed, dtype=float).reshape(-1, 2)
    if centers.shape[0] != problem.m:
        raise DomainError("seed and problem disagree in the number of patches")
    eps_targets = [float(e) for e in eps_targets]
    if not eps_targets:
        raise DomainError("eps_targets is empty")
    if any(e <= 0 for e in eps_targets) or any(b <= a for a, b in zip(eps_targets, eps_targets[1:])):
        raise DomainError("eps_targets must be positive and strictly increasing")
    eps_max = default_eps_max(problem, centers) if eps_max is None else float(eps_max)
    rho0 = default_rho0(problem, centers) if rho0 is None else float(rho0)
    if eps_targets[-1] > eps_max:
        raise DomainError(f"eps target {eps_targets[-1]} exceeds eps_max {eps_max:.4g}")
    x0 = np.array(centers, dtype=float)
    out = ContinuationResult(seed=x0, rho0=rho0, eps_max=eps_max)
    state0 = ContinuationState.initial(x0, problem.kappas, problem.gamma, problem.n, 0.0)
    try:
        state0, rep0 = newton_solve(state0, problem, tol, max_iter, jacobian=jacobian, strategy=strategy)
    except GsqgError as exc:
        out.message = f"the eps = 0 configuration is not a solution: {exc}"
        return out
    out.states.append(state0)
    out.reports.append(rep0)

    def attempt(prev: ContinuationState, prev2, eps):
        guess = prev.with_eps(eps)
        if predictor == "secant" and prev2 is not None and prev.eps > prev2.eps:
            s = (eps - prev.eps) / (prev.eps - prev2.eps)
            u = prev.unknowns() + s * (prev.unknowns() - prev2.unknowns())
            guess = prev.with_eps(eps).with_unknowns(u)
        return newton_solve(guess, problem, tol, max_iter, u_ref=prev.unknowns(), jacobian=jacobian,
                            strategy=strategy)

    for eps in eps_targets:
        prev = out.states[-1]
        prev2 = out.states[-2] if len(out.states) > 1 else None
        try:
            st, rep = attempt(prev, prev2, eps)
        except GsqgError as first:
            mid = 0.5 * (prev.eps + eps)
            log.info("Newton failed at eps=%g (%s); bisecting at %g", eps, first, mid)
            try:
                st_mid, rep_mid = attempt(prev, prev2, mid)
                st, rep = attempt(st_mid, prev, eps)
            except GsqgError as exc:
                hint = " (try a smaller initial eps)" if len(out.states) == 1 else ""
                out.message = f"continuation stopped at eps={eps:g}: {exc}{hint}"
                return out
        bad = _admissible(st, x0, rho0)
        if bad:
            out.message = f"continuation aborted at eps={eps:g}: {bad}"
            return out
        out.states.append(st)
        out.reports.append(rep)
    out.completed = True
    out.message = "completed"
    return out


def verify_solution(state: ContinuationState, problem: Problem, x0=None, n_area: int = 2048) -> dict:
    """Check the conclusions of the construction on a solved state.

    Returns a dictionary with the residual norm and per-term norms, the flux
    check ``|Gamma_i|/eps^2`` (polygon area on ``n_area`` boundary samples)
    against ``kappa_i``, radius deviations, the minimal signed curvature on
    the collocation grid, centroid offsets from ``x0`` (default: the
    centers) and the leakage of ``j = 0, 1`` modes (structurally zero).
    """
    ctx = state.context(problem, check=False)
    x0 = state.centers if x0 is None else np.asarray(x0, dtype=float).reshape(-1, 2)
    terms = residual_terms(state, problem)
    patches = []
    for i, g in enumerate(ctx.geometries):
        beta = ctx.beta
        if state.eps > 0:
            area = enclosed_area(g, n_area) / state.eps ** 2
            curv = signed_curvature(g, beta)
            cen = centroid(g, n_area)
        else:
            area = np.pi * g.rho ** 2
            curv = np.full(beta.size, np.inf)
            cen = g.center
        r = radius(g, beta)
        patches.append({
            "flux": float(area),
            "flux_relative_error": float(abs(area - state.kappas[i]) / state.kappas[i]),
            "rho": float(g.rho),
            "radius_deviation_from_rho": float(np.max(np.abs(r - g.rho))),
            "radius_deviation_from_sqrt_kappa_over_pi": float(np.max(np.abs(r - np.sqrt(state.kappas[i] / np.pi)))),
            "min_curvature": float(np.min(curv)),
            "curvature_points": int(beta.size),
            "curvature_positive": bool(np.all(curv > 0)),
            "centroid": [float(c) for c in cen],
            "centroid_offset": float(np.linalg.norm(cen - x0[i])),
            "center_drift": float(np.linalg.norm(state.centers[i] - x0[i])),
            "shape_norm_Y3": float(norm_Y(state.shapes[i], 3)),
        })
    return {
        "eps": state.eps,
        "residual_norm": terms["total"],
        "term_norms": {k: v for k, v in terms.items() if k != "total"},
        "patches": patches,
        "mode_leakage": 0.0,
        "all_curvature_positive": all(p["curvature_positive"] for p in patches),
        "max_flux_relative_error": max(p["flux_relative_error"] for p in patches),
    }
