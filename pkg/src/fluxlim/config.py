"""Flat ``key = value`` run configuration: parsing, validation, builders.

The format is deliberately small: UTF-8 text, one assignment per line,
``#`` starts a comment, keys are known in advance and may appear once.
Unknown keys and malformed lines are hard errors so a typo cannot silently
fall back to a default.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

import numpy as np

from .grid import Field, Grid, load_snapshot, make_grid
from .limiter import Params
from .profiles import gaussian_bump, poly_spike, uniform_field
from .steady import SteadyProfileSpec, sample
from .stepping import StepControls

__all__ = ["ConfigError", "RunConfig", "parse_config", "build_problem",
           "build_params", "build_controls"]

_IC_KINDS = ("gaussian", "uniform", "spike", "single_peak", "multi_peak",
             "factorized", "snapshot")
_SCHEMES = ("explicit", "semi_implicit")


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """One run: grid, physics, initial condition, stepping, outputs."""

    dim: int = 1
    box_halfwidth: float | None = None  # default 5/chi when unset
    cells: int = 512
    chi: float = 1.0
    eps: float = 0.0
    scheme: str = "explicit"
    dt: float | None = None
    cfl_safety: float = 0.45
    picard_tol: float = 1e-10
    picard_max_iter: int = 200
    linear_solver_tol: float = 1e-12
    t_end: float = 1.0
    diag_stride: int = 10
    p_set: tuple[float, ...] = (2.0, 4.0)
    grad_p_set: tuple[float, ...] = (2.0,)
    ic: str = "gaussian"
    ic_mass: float | None = None
    ic_amplitude: float | None = None
    ic_width: float = 1.0
    ic_center: tuple[float, ...] = (0.0,)
    ic_centers: tuple[float, ...] | None = None
    ic_amplitudes: tuple[float, ...] | None = None
    ic_p: float = 4.0
    ic_pnorm: float = 1.0
    ic_path: str | None = None
    sigma_rel: float = 1e-12
    seed: int = 0
    out: str = "out"
    snapshot_stride: int = 0
    eps_list: tuple[float, ...] = (0.1, 0.05, 0.025, 0.0)
    spike_widths: tuple[float, ...] = (0.8, 0.4, 0.2)
    study_p: float = 4.0
    threads: int = 1


def _parse_float(raw: str) -> float:
    return float(raw)


def _parse_int(raw: str) -> int:
    return int(raw, 10)


def _parse_floats(raw: str) -> tuple[float, ...]:
    parts = raw.replace(",", " ").split()
    if not parts:
        raise ValueError("expected at least one number")
    return tuple(float(p) for p in parts)


def _parse_str(raw: str) -> str:
    return raw


_PARSERS = {
    "dim": _parse_int,
    "box_halfwidth": _parse_float,
    "cells": _parse_int,
    "chi": _parse_float,
    "eps": _parse_float,
    "scheme": _parse_str,
    "dt": _parse_float,
    "cfl_safety": _parse_float,
    "picard_tol": _parse_float,
    "picard_max_iter": _parse_int,
    "linear_solver_tol": _parse_float,
    "t_end": _parse_float,
    "diag_stride": _parse_int,
    "p_set": _parse_floats,
    "grad_p_set": _parse_floats,
    "ic": _parse_str,
    "ic_mass": _parse_float,
    "ic_amplitude": _parse_float,
    "ic_width": _parse_float,
    "ic_center": _parse_floats,
    "ic_centers": _parse_floats,
    "ic_amplitudes": _parse_floats,
    "ic_p": _parse_float,
    "ic_pnorm": _parse_float,
    "ic_path": _parse_str,
    "sigma_rel": _parse_float,
    "seed": _parse_int,
    "out": _parse_str,
    "snapshot_stride": _parse_int,
    "eps_list": _parse_floats,
    "spike_widths": _parse_floats,
    "study_p": _parse_float,
    "threads": _parse_int,
}


def _validate(cfg: RunConfig) -> None:
    def bad(key: str, why: str):
        return ConfigError(f"invalid value for '{key}': {why}")

    if cfg.dim not in (1, 2):
        raise bad("dim", f"must be 1 or 2, got {cfg.dim}")
    if cfg.box_halfwidth is not None and not cfg.box_halfwidth > 0.0:
        raise bad("box_halfwidth", "must be positive")
    if cfg.cells < 3:
        raise bad("cells", "need at least 3 cells per axis")
    if not (np.isfinite(cfg.chi) and cfg.chi >= 0.0):
        raise bad("chi", f"must be finite and >= 0, got {cfg.chi}")
    if not (np.isfinite(cfg.eps) and cfg.eps >= 0.0):
        raise bad("eps", f"must be finite and >= 0, got {cfg.eps}")
    if cfg.scheme not in _SCHEMES:
        raise bad("scheme", f"must be one of {_SCHEMES}")
    if cfg.dt is not None and not cfg.dt > 0.0:
        raise bad("dt", "must be positive")
    if not (0.0 < cfg.cfl_safety <= 1.0):
        raise bad("cfl_safety", "must lie in (0, 1]")
    if not cfg.picard_tol > 0.0:
        raise bad("picard_tol", "must be positive")
    if cfg.picard_max_iter < 1:
        raise bad("picard_max_iter", "must be >= 1")
    if not cfg.linear_solver_tol > 0.0:
        raise bad("linear_solver_tol", "must be positive")
    if not cfg.t_end >= 0.0:
        raise bad("t_end", "must be >= 0")
    if cfg.diag_stride < 1:
        raise bad("diag_stride", "must be >= 1")
    for p in cfg.p_set:
        if p < 1.0:
            raise bad("p_set", f"exponents must be >= 1, got {p}")
    for p in cfg.grad_p_set:
        if p < 1.0:
            raise bad("grad_p_set", f"exponents must be >= 1, got {p}")
    if cfg.ic not in _IC_KINDS:
        raise bad("ic", f"must be one of {_IC_KINDS}")
    if cfg.ic_mass is not None and not cfg.ic_mass > 0.0:
        raise bad("ic_mass", "must be positive")
    if cfg.ic_amplitude is not None and cfg.ic != "uniform" and not cfg.ic_amplitude > 0.0:
        raise bad("ic_amplitude", "must be positive")
    if cfg.ic == "uniform" and cfg.ic_amplitude is not None and cfg.ic_amplitude < 0.0:
        raise bad("ic_amplitude", "must be >= 0 for a uniform field")
    if not cfg.ic_width > 0.0:
        raise bad("ic_width", "must be positive")
    if cfg.ic_p < 1.0:
        raise bad("ic_p", "must be >= 1")
    if not cfg.ic_pnorm > 0.0:
        raise bad("ic_pnorm", "must be positive")
    if not (np.isfinite(cfg.sigma_rel) and cfg.sigma_rel >= 0.0):
        raise bad("sigma_rel", "must be finite and >= 0")
    if cfg.snapshot_stride < 0:
        raise bad("snapshot_stride", "must be >= 0")
    if cfg.threads < 1:
        raise bad("threads", "must be >= 1")
    if cfg.ic == "snapshot" and not cfg.ic_path:
        raise bad("ic_path", "required when ic = snapshot")
    if cfg.ic == "multi_peak":
        if cfg.ic_centers is None or cfg.ic_amplitudes is None:
            raise bad("ic_centers", "multi_peak needs ic_centers and ic_amplitudes")
        if len(cfg.ic_centers) != len(cfg.ic_amplitudes):
            raise bad("ic_amplitudes", "must match ic_centers in length")
    for w in cfg.spike_widths:
        if not w > 0.0:
            raise bad("spike_widths", "widths must be positive")
    if cfg.study_p < 1.0:
        raise bad("study_p", "must be >= 1")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a flat ``key = value`` configuration."""
    seen: dict[str, object] = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {rawline.strip()!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if not key:
            raise ConfigError(f"line {lineno}: missing key before '='")
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        try:
            seen[key] = _PARSERS[key](raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: cannot parse value for '{key}': {exc}") from None
    cfg = replace(RunConfig(), **seen)
    _validate(cfg)
    return cfg


def config_keys() -> tuple[str, ...]:
    """All recognized configuration keys (documented interface)."""
    return tuple(f.name for f in fields(RunConfig))


def build_params(cfg: RunConfig) -> Params:
    return Params(chi=cfg.chi, eps=cfg.eps)


def build_controls(cfg: RunConfig) -> StepControls:
    return StepControls(
        dt=cfg.dt,
        cfl_safety=cfg.cfl_safety,
        picard_tol=cfg.picard_tol,
        picard_max_iter=cfg.picard_max_iter,
        linear_solver_tol=cfg.linear_solver_tol,
    )


def _center(cfg: RunConfig) -> tuple[float, ...]:
    c = cfg.ic_center
    if len(c) == 1 and cfg.dim > 1:
        c = c * cfg.dim
    if len(c) != cfg.dim:
        raise ConfigError(f"invalid value for 'ic_center': expected {cfg.dim} coordinates")
    return c


def build_problem(cfg: RunConfig) -> tuple[Grid, Field]:
    """Materialize the grid and initial field described by a config."""
    if cfg.ic == "snapshot":
        field = load_snapshot(cfg.ic_path)
        return field.grid, field

    half = cfg.box_halfwidth if cfg.box_halfwidth is not None else 5.0 / max(cfg.chi, 1e-300)
    grid = make_grid(cfg.dim, half, cfg.cells)
    center = _center(cfg)

    if cfg.ic == "uniform":
        value = 1.0 if cfg.ic_amplitude is None else cfg.ic_amplitude
        return grid, uniform_field(grid, value)
    if cfg.ic == "gaussian":
        if cfg.ic_amplitude is not None and cfg.ic_mass is not None:
            raise ConfigError("invalid value for 'ic_amplitude': give mass or amplitude, not both")
        mass = cfg.ic_mass if (cfg.ic_mass is not None or cfg.ic_amplitude is not None) else 1.0
        return grid, gaussian_bump(grid, cfg.ic_width, center=center, mass=mass,
                                   amplitude=cfg.ic_amplitude)
    if cfg.ic == "spike":
        return grid, poly_spike(grid, cfg.ic_width, cfg.ic_p, center=center, p_norm=cfg.ic_pnorm)

    if cfg.chi <= 0.0:
        raise ConfigError("invalid value for 'chi': steady profiles need chi > 0")
    if cfg.ic == "multi_peak":
        peaks = tuple((a, (c,)) for a, c in zip(cfg.ic_amplitudes, cfg.ic_centers))
        spec = SteadyProfileSpec(kind="multi_peak", chi=cfg.chi, peaks=peaks,
                                 target_mass=cfg.ic_mass)
    else:
        amp = cfg.ic_amplitude if cfg.ic_amplitude is not None else 1.0
        mass = cfg.ic_mass
        if cfg.ic_amplitude is None and mass is None:
            mass = 1.0
        spec = SteadyProfileSpec(kind=cfg.ic, chi=cfg.chi, peaks=((amp, center),),
                                 target_mass=mass)
    return grid, sample(spec, grid)
