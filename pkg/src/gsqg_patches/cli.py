"""Command-line entry point ``gsqg-patches``.

Four modes:

``spectrum``
    Table of the multipliers ``sigma_j`` (CSV).
``kr-critical``
    Critical points of the Kirchhoff-Routh function (JSON).
``solve``
    Continuation of the patch curve from a critical point (JSON plus one
    boundary CSV per ``eps``).
``validate``
    Cross-validation suite with a pass/fail summary.

Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
failures.  Every JSON result validates against ``schemas/result.schema.json``
and is written with sorted keys so that reruns are byte-identical; wall-clock
timings go to a separate ``timings.json``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from contextlib import contextmanager
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .config import RunConfig, dump_defaults, load_config
from .contour import boundary_point, norm_X, signed_curvature, uniform_grid
from .errors import ConfigError, GsqgError
from .green import make_kernel
from .kr import VortexConfiguration, default_seeds, find_critical_points, w_m
from .linop import assemble_jacobian
from .special import c_gamma, sigma_spectrum
from .solver import continue_in_eps, newton_solve, verify_solution
from .system import Problem
from .validation import run_validation

__all__ = ["main", "run", "build_parser", "load_schema", "SCHEMA_VERSION"]

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

log = logging.getLogger("gsqg_patches")


def load_schema() -> dict:
    """The JSON schema of result files."""
    text = resources.files("gsqg_patches").joinpath("schemas/result.schema.json").read_text()
    return json.loads(text)


def _clean(obj):
    """Convert numpy scalars/arrays to JSON types; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _dump(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


class _Timer:
    def __init__(self):
        self.stages: dict[str, float] = {}

    @contextmanager
    def stage(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = self.stages.get(name, 0.0) + time.perf_counter() - t0


def _provenance(cfg: RunConfig) -> dict:
    return {
        "package_version": __version__,
        "gamma": cfg.gamma,
        "c_gamma": c_gamma(cfg.gamma),
        "domain": cfg.domain,
        "domain_radius": cfg.domain_radius,
        "n": cfg.n,
        "norm_k": cfg.norm_k,
        "quadrature": dict(cfg.raw["quadrature"]),
        "tolerances": dict(cfg.tolerances),
        "continuation": dict(cfg.continuation),
    }


def _write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    path.write_text(buf.getvalue(), newline="")
    return buf.getvalue()


def _critical_dict(kernel, cp) -> dict:
    eig = np.asarray(cp.hessian_eigenvalues)
    return {
        "points": cp.config.points,
        "strengths": cp.config.strengths,
        "w_m": w_m(kernel, cp.config),
        "grad_norm": cp.grad_norm,
        "nondegenerate": cp.nondegenerate,
        "reduced_nondegenerate": cp.reduced_nondegenerate,
        "index": cp.index,
        "reduced_index": cp.reduced_index,
        "hessian_eigenvalues": eig,
        "hessian_determinant": float(np.prod(eig)) if eig.size else 0.0,
    }


def _state_dict(state) -> dict:
    return {
        "eps": state.eps,
        "centers": state.centers,
        "rhos": state.rhos,
        "kappas": state.kappas,
        "shapes": [{"a": s.a, "b": s.b} for s in state.shapes],
    }


# ----------------------------------------------------------------- modes


def _mode_spectrum(cfg: RunConfig, out: Path, timer: _Timer, result: dict, verbose_out) -> int:
    with timer.stage("spectrum"):
        spec = sigma_spectrum(cfg.n, cfg.gamma)
        j = np.arange(1, cfg.n + 1)
        rows = [(int(k), float(s), float(s * k)) for k, s in zip(j, spec.values)]
        text = _write_csv(out / "spectrum.csv", ["j", "sigma_j", "sigma_j_times_j"], rows)
    verbose_out.write(text.replace("\r\n", "\n"))
    result["spectrum_csv"] = "spectrum.csv"
    return EXIT_OK


def _kr_seeds(cfg: RunConfig, kernel):
    seeds = []
    if all(c is not None for c in cfg.center_seeds):
        seeds.append(VortexConfiguration(np.array(cfg.center_seeds), cfg.kappas))
    if cfg.kr["use_grid"]:
        seeds.extend(default_seeds(kernel, cfg.kappas, grid=cfg.kr["grid"], shrink=cfg.kr["shrink"],
                                   max_seeds=cfg.kr["max_seeds"]))
    return seeds


def _mode_kr(cfg: RunConfig, out: Path, timer: _Timer, result: dict, verbose_out) -> int:
    kernel = make_kernel(cfg.domain, cfg.gamma, cfg.domain_radius)
    with timer.stage("kr_search"):
        seeds = _kr_seeds(cfg, kernel)
        found, reports = find_critical_points(kernel, seeds, tol=cfg.tolerances["kr"],
                                              max_iter=cfg.tolerances["kr_max_iter"], return_reports=True)
    result["critical_points"] = [_critical_dict(kernel, cp) for cp in found]
    result["seeds_tried"] = len(seeds)
    result["seeds_failed"] = sum(not r.converged for r in reports)
    verbose_out.write(f"{len(found)} critical point(s) from {len(seeds)} seed(s)\n")
    for cp in found:
        verbose_out.write(f"  points={np.round(cp.config.points, 10).tolist()} index={cp.index} "
                          f"nondegenerate={cp.nondegenerate} reduced_nondegenerate={cp.reduced_nondegenerate}\n")
    if not found:
        result["message"] = "no critical point found"
        return EXIT_NUMERICAL
    return EXIT_OK


def _boundary_rows(problem, state, m_points):
    beta = uniform_grid(m_points)
    rows = []
    for i, geom in enumerate(state.geometries()):
        pts = boundary_point(geom, beta)
        curv = signed_curvature(geom, beta)
        for b, (x, y), k in zip(beta, pts, curv):
            rows.append((i, float(b), float(x), float(y), float(k)))
    return rows


def _extra_checks(cfg: RunConfig, problem: Problem, final, x0) -> dict:
    """Cross-checks enabled by ``--verify`` on the final state."""
    jac_sa = assemble_jacobian(final, problem, method="semi-analytic")
    jac_fd = assemble_jacobian(final, problem, method="fd", central=True)
    jac_err = float(np.max(np.abs(jac_sa - jac_fd)) / max(np.max(np.abs(jac_fd)), 1e-300))
    fine = Problem(problem.kernel, problem.kappas, problem.n, problem.quad.refined())
    refined, rep = newton_solve(final, fine, cfg.tolerances["newton"], cfg.tolerances["max_iter"],
                                u_ref=final.unknowns())
    shape_change = max(norm_X(a - b, cfg.norm_k, cfg.gamma) for a, b in zip(final.shapes, refined.shapes))
    center_change = float(np.max(np.abs(final.centers - refined.centers)))
    return {
        "jacobian_relative_difference": jac_err,
        "jacobian_check_passed": jac_err <= 1e-6,
        "grid_doubling_shape_change_X": shape_change,
        "grid_doubling_center_change": center_change,
        "grid_doubling_passed": shape_change <= 1e-7 and center_change <= 1e-7,
        "refined_newton_iterations": rep.iterations,
    }


def _mode_solve(cfg: RunConfig, out: Path, timer: _Timer, result: dict, verbose_out, verify: bool) -> int:
    kernel = make_kernel(cfg.domain, cfg.gamma, cfg.domain_radius)
    problem = Problem(kernel, cfg.kappas, cfg.n, cfg.quad)
    seed_cfg = VortexConfiguration(np.array(cfg.center_seeds), cfg.kappas)
    seed = seed_cfg
    seed_info = {"input_centers": seed_cfg.points, "refined": False}
    if cfg.continuation["refine_centers"]:
        with timer.stage("kr_refine"):
            found = find_critical_points(kernel, [seed_cfg], tol=cfg.tolerances["kr"],
                                         max_iter=cfg.tolerances["kr_max_iter"])
        if not found:
            result["seed"] = seed_info
            result["message"] = "the center seed does not converge to a Kirchhoff-Routh critical point"
            result["curve"] = []
            result["completed"] = False
            return EXIT_NUMERICAL
        seed = found[0]
        seed_info.update(refined=True, critical_point=_critical_dict(kernel, seed))
    result["seed"] = seed_info
    with timer.stage("continuation"):
        cont = continue_in_eps(seed, problem, cfg.eps_targets, tol=cfg.tolerances["newton"],
                               max_iter=cfg.tolerances["max_iter"], predictor=cfg.continuation["predictor"],
                               eps_max=cfg.continuation["eps_max"], rho0=cfg.continuation["rho0"],
                               jacobian=cfg.continuation["jacobian"], strategy=cfg.continuation["strategy"])
    x0 = cont.seed
    seed_info.update(rho0=cont.rho0, eps_max=cont.eps_max)
    if cont.states:
        seed_info["eps0_state"] = _state_dict(cont.states[0])
        seed_info["eps0_newton"] = cont.reports[0].as_dict()
    m_points = cfg.output["boundary_points"] or 4 * cfg.n
    curve = []
    with timer.stage("postprocess"):
        for k, (state, rep) in enumerate(zip(cont.states[1:], cont.reports[1:]), start=1):
            ver = verify_solution(state, problem, x0)
            entry = _state_dict(state)
            entry.update(residual_norm=ver["residual_norm"], term_norms=ver["term_norms"], newton=rep.as_dict(),
                         verification=ver, curvature_positive=ver["all_curvature_positive"])
            name = f"boundary_eps_{k:02d}.csv"
            _write_csv(out / name, ["patch_index", "beta", "x", "y", "curvature"],
                       _boundary_rows(problem, state, m_points))
            entry["boundary_csv"] = name
            curve.append(entry)
            verbose_out.write(f"eps={state.eps:g}: |r|={ver['residual_norm']:.3e} newton_its={rep.iterations} "
                              f"flux_err={ver['max_flux_relative_error']:.2e} "
                              f"convex={ver['all_curvature_positive']}\n")
    result["curve"] = curve
    result["completed"] = cont.completed
    result["message"] = cont.message
    if verify and len(cont.states) > 1:
        with timer.stage("verify"):
            result["extra_checks"] = _extra_checks(cfg, problem, cont.states[-1], x0)
        verbose_out.write(f"extra checks: {result['extra_checks']}\n")
    if not cont.completed:
        verbose_out.write(f"continuation incomplete: {cont.message}\n")
        return EXIT_NUMERICAL
    return EXIT_OK


def _mode_validate(cfg: RunConfig, out: Path, timer: _Timer, result: dict, verbose_out) -> int:
    with timer.stage("validate"):
        checks = run_validation(cfg.gamma)
    result["checks"] = [c.as_dict() for c in checks]
    ok = all(c.passed for c in checks)
    result["all_passed"] = ok
    for c in checks:
        verbose_out.write(f"{'PASS' if c.passed else 'FAIL'} {c.name}: value={c.value:.3e} tol={c.tolerance:.1e}"
                          f"{' (' + c.detail + ')' if c.detail else ''}\n")
    verbose_out.write(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed\n")
    return EXIT_OK if ok else EXIT_NUMERICAL


# ------------------------------------------------------------------ driver


def run(cfg: RunConfig, verify: bool = False, stream=None) -> int:
    """Execute one configured run and write its artifacts.

    Parameters
    ----------
    cfg : RunConfig
    verify : bool
        Extra cross-checks in solve mode.
    stream : file-like, optional
        Human-readable progress (default ``sys.stdout``).

    Returns
    -------
    int
        Exit status.
    """
    stream = sys.stdout if stream is None else stream
    out = Path(cfg.output["dir"])
    out.mkdir(parents=True, exist_ok=True)
    timer = _Timer()
    result = {"schema_version": SCHEMA_VERSION, "mode": cfg.mode, "provenance": _provenance(cfg),
              "warnings": list(cfg.warnings)}
    for w in cfg.warnings:
        stream.write(f"warning: {w}\n")
    try:
        if cfg.mode == "spectrum":
            status = _mode_spectrum(cfg, out, timer, result, stream)
        elif cfg.mode == "kr-critical":
            status = _mode_kr(cfg, out, timer, result, stream)
        elif cfg.mode == "solve":
            status = _mode_solve(cfg, out, timer, result, stream, verify)
        else:
            status = _mode_validate(cfg, out, timer, result, stream)
    except GsqgError as exc:
        module = getattr(exc, "__module__", "gsqg_patches")
        origin = exc.__traceback__
        while origin is not None and origin.tb_next is not None:
            origin = origin.tb_next
        where = origin.tb_frame.f_globals.get("__name__", module) if origin is not None else module
        result["message"] = f"{type(exc).__name__} in {where}: {exc}"
        report = getattr(exc, "report", None)
        if report is not None and hasattr(report, "as_dict"):
            result["failure_report"] = report.as_dict()
        stream.write(f"numerical failure: {result['message']}\n")
        status = EXIT_NUMERICAL
    result = _clean(result)
    jsonschema.validate(result, load_schema())
    (out / "result.json").write_text(_dump(result))
    (out / "timings.json").write_text(_dump({"stages_seconds": timer.stages}))
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gsqg-patches",
                                description="Stationary gSQG vortex patches in bounded domains.")
    p.add_argument("--mode", choices=["spectrum", "kr-critical", "solve", "validate"])
    p.add_argument("--config", help="YAML configuration file")
    p.add_argument("--gamma", type=float)
    p.add_argument("--n", type=int, help="Fourier truncation N")
    p.add_argument("--out", help="output directory")
    p.add_argument("--print-config", action="store_true", help="print all defaults as YAML and exit")
    p.add_argument("--verify", action="store_true", help="extra cross-checks in solve mode")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.print_config:
        sys.stdout.write(dump_defaults())
        return EXIT_OK
    overrides = {"mode": args.mode, "gamma": args.gamma, "n": args.n, "output.dir": args.out}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    return run(cfg, verify=args.verify)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
