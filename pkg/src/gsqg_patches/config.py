"""Run configuration: YAML ingestion, defaults and validation.

Every key has a default (see :data:`DEFAULTS`, printed by
``gsqg-patches --print-config``).  Errors name the offending key and, when
the value came from a file, its line number.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .functional import QuadratureConfig

__all__ = ["DEFAULTS", "RunConfig", "load_config", "build_config", "dump_defaults"]

MODES = ("spectrum", "kr-critical", "solve", "validate")

DEFAULTS: dict = {
    "mode": "solve",
    "gamma": 1.5,
    "domain": "disc",
    "domain_radius": 1.0,
    "n": 64,
    "norm_k": 3,
    "patches": [{"kappa": math.pi, "center_seed": [0.0, 0.0]}],
    "eps_targets": [0.01, 0.02, 0.04],
    "quadrature": {
        "n_grid": None,
        "eta_factor": 1,
        "g1_method": "spectral",
        "graded_levels": 12,
        "graded_ratio": 0.5,
        "graded_nodes": 8,
        "radial_nodes": 16,
        "core_eta": 32,
        "sliver_nodes": 2,
        "g3_coupling": "self",
        "g3_normalization": "consistent",
        "g2_variant": "R",
        "grad_method": "auto",
    },
    "tolerances": {"newton": 1e-10, "max_iter": 10, "kr": 1e-10, "kr_max_iter": 50},
    "continuation": {
        "predictor": "trivial",
        "eps_max": None,
        "rho0": None,
        "jacobian": "semi-analytic",
        "strategy": "coupled",
        "refine_centers": True,
    },
    "kr": {"use_grid": True, "grid": 5, "shrink": 0.8, "max_seeds": 200},
    "output": {"dir": "out", "boundary_points": None},
}


class _LineMap:
    """Line numbers of keys in a YAML document, indexed by dotted path."""

    def __init__(self, text: str | None):
        self.lines: dict[str, int] = {}
        if text:
            try:
                node = yaml.compose(text)
            except yaml.YAMLError:
                node = None
            if node is not None:
                self._walk(node, "")

    def _walk(self, node, prefix):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                path = f"{prefix}.{k.value}" if prefix else str(k.value)
                self.lines[path] = k.start_mark.line + 1
                self._walk(v, path)
        elif isinstance(node, yaml.SequenceNode):
            for idx, v in enumerate(node.value):
                path = f"{prefix}[{idx}]"
                self.lines[path] = v.start_mark.line + 1
                self._walk(v, path)

    def where(self, path: str) -> str:
        probe = path
        while probe:
            if probe in self.lines:
                return f" (line {self.lines[probe]})"
            probe = probe.rsplit(".", 1)[0] if "." in probe else ""
        return ""


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration.

    Attributes mirror :data:`DEFAULTS`; ``raw`` keeps the merged dictionary
    for provenance.
    """

    mode: str
    gamma: float
    domain: str
    domain_radius: float
    n: int
    norm_k: int
    kappas: tuple
    center_seeds: tuple
    eps_targets: tuple
    quad: QuadratureConfig
    tolerances: dict
    continuation: dict
    kr: dict
    output: dict
    raw: dict = field(repr=False)
    warnings: tuple = ()


def _merge(base: dict, over: dict, lines: _LineMap, prefix: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        path = f"{prefix}.{k}" if prefix else str(k)
        if k not in base:
            raise ConfigError(f"unknown configuration key '{path}'{lines.where(path)}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"'{path}' must be a mapping{lines.where(path)}")
            out[k] = _merge(base[k], v, lines, path)
        else:
            out[k] = v
    return out


def _num(raw, path, lines, kind=float, positive=False, allow_none=False):
    v = raw
    for part in path.split("."):
        v = v[part]
    if v is None and allow_none:
        return None
    try:
        if isinstance(v, bool):
            raise TypeError
        val = kind(v)
        if kind is int and val != v:
            raise TypeError
    except (TypeError, ValueError):
        raise ConfigError(f"'{path}' must be a {kind.__name__}, got {v!r}{lines.where(path)}") from None
    if positive and not val > 0:
        raise ConfigError(f"'{path}' must be positive{lines.where(path)}")
    return val


def build_config(raw_over: dict | None = None, text: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge user settings over :data:`DEFAULTS` and validate.

    Parameters
    ----------
    raw_over : dict, optional
        Parsed user configuration.
    text : str, optional
        The YAML source (for line attribution).
    overrides : dict, optional
        Command-line overrides (``gamma``, ``n``, ``mode``, ``output.dir``).
    """
    lines = _LineMap(text)
    raw_over = raw_over or {}
    if not isinstance(raw_over, dict):
        raise ConfigError("the configuration file must contain a mapping")
    raw = _merge(DEFAULTS, raw_over, lines)
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if k == "output.dir":
            raw["output"]["dir"] = v
        else:
            raw[k] = v
    mode = raw["mode"]
    if mode not in MODES:
        raise ConfigError(f"'mode' must be one of {MODES}, got {mode!r}{lines.where('mode')}")
    gamma = _num(raw, "gamma", lines)
    warnings = []
    if mode == "validate" and 0.0 < gamma < 1.0:
        warnings.append(f"gamma={gamma} lies in the untested range (0, 1); only gamma-generic checks run")
    elif not 1.0 < gamma < 2.0:
        raise ConfigError(f"'gamma' must satisfy 1 < gamma < 2, got {gamma}{lines.where('gamma')}")
    domain = raw["domain"]
    if domain not in ("disc", "free"):
        raise ConfigError(f"'domain' must be 'disc' or 'free', got {domain!r}{lines.where('domain')}")
    radius = _num(raw, "domain_radius", lines, positive=True)
    n = _num(raw, "n", lines, int)
    if n < 2:
        raise ConfigError(f"'n' must be >= 2{lines.where('n')}")
    norm_k = _num(raw, "norm_k", lines, int)
    patches = raw["patches"]
    if not isinstance(patches, list) or not patches:
        raise ConfigError(f"'patches' must be a non-empty list{lines.where('patches')}")
    kappas, seeds = [], []
    for idx, p in enumerate(patches):
        path = f"patches[{idx}]"
        if not isinstance(p, dict) or "kappa" not in p:
            raise ConfigError(f"'{path}' needs a 'kappa' entry{lines.where(path)}")
        extra = set(p) - {"kappa", "center_seed"}
        if extra:
            raise ConfigError(f"unknown key(s) {sorted(extra)} in '{path}'{lines.where(path)}")
        try:
            kappa = float(p["kappa"])
        except (TypeError, ValueError):
            raise ConfigError(f"'{path}.kappa' must be a number{lines.where(path)}") from None
        if not kappa > 0:
            raise ConfigError(f"'{path}.kappa' must be positive{lines.where(path)}")
        c = p.get("center_seed")
        if c is not None:
            if not (isinstance(c, (list, tuple)) and len(c) == 2):
                raise ConfigError(f"'{path}.center_seed' must be [x, y]{lines.where(path)}")
            c = (float(c[0]), float(c[1]))
        kappas.append(kappa)
        seeds.append(c)
    eps = raw["eps_targets"]
    if not isinstance(eps, list):
        raise ConfigError(f"'eps_targets' must be a list{lines.where('eps_targets')}")
    try:
        eps = [float(e) for e in eps]
    except (TypeError, ValueError):
        raise ConfigError(f"'eps_targets' must contain numbers{lines.where('eps_targets')}") from None
    if mode == "solve":
        if not eps:
            raise ConfigError(f"'eps_targets' is empty{lines.where('eps_targets')}")
        if any(e <= 0 for e in eps) or any(b <= a for a, b in zip(eps, eps[1:])):
            raise ConfigError(f"'eps_targets' must be positive and strictly increasing{lines.where('eps_targets')}")
        if any(c is None for c in seeds):
            raise ConfigError("solve mode needs a 'center_seed' for every patch" + lines.where("patches"))
    try:
        quad = QuadratureConfig(**raw["quadrature"])
        if mode in ("solve", "validate"):
            quad.grid_size(n)
    except Exception as exc:  # DomainError or TypeError from bad values
        raise ConfigError(f"invalid 'quadrature' settings: {exc}{lines.where('quadrature')}") from None
    tol = raw["tolerances"]
    for key in ("newton", "kr"):
        _num(raw, f"tolerances.{key}", lines, positive=True)
    for key in ("max_iter", "kr_max_iter"):
        _num(raw, f"tolerances.{key}", lines, int, positive=True)
    cont = raw["continuation"]
    if cont["predictor"] not in ("trivial", "secant"):
        raise ConfigError(f"'continuation.predictor' must be 'trivial' or 'secant'{lines.where('continuation.predictor')}")
    if cont["jacobian"] not in ("semi-analytic", "fd"):
        raise ConfigError(f"'continuation.jacobian' must be 'semi-analytic' or 'fd'{lines.where('continuation.jacobian')}")
    if cont["strategy"] not in ("coupled", "nested"):
        raise ConfigError(f"'continuation.strategy' must be 'coupled' or 'nested'{lines.where('continuation.strategy')}")
    for key in ("eps_max", "rho0"):
        _num(raw, f"continuation.{key}", lines, positive=True, allow_none=True)
    _num(raw, "kr.grid", lines, int, positive=True)
    _num(raw, "kr.shrink", lines, positive=True)
    _num(raw, "kr.max_seeds", lines, int, positive=True, allow_none=True)
    _num(raw, "output.boundary_points", lines, int, positive=True, allow_none=True)
    return RunConfig(
        mode=mode,
        gamma=gamma,
        domain=domain,
        domain_radius=radius,
        n=n,
        norm_k=norm_k,
        kappas=tuple(kappas),
        center_seeds=tuple(seeds),
        eps_targets=tuple(eps),
        quad=quad,
        tolerances=dict(tol),
        continuation=dict(cont),
        kr=dict(raw["kr"]),
        output=dict(raw["output"]),
        raw=raw,
        warnings=tuple(warnings),
    )


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """Read a YAML file (or only defaults when ``path`` is None) and validate."""
    if path is None:
        return build_config({}, None, overrides)
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration file {p}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1})" if mark is not None else ""
        raise ConfigError(f"malformed YAML in {p}{where}: {getattr(exc, 'problem', exc)}") from None
    return build_config(data if data is not None else {}, text, overrides)


def dump_defaults() -> str:
    """All defaults as YAML text."""
    return yaml.safe_dump(DEFAULTS, sort_keys=False, default_flow_style=None)
