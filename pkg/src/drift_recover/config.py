"""JSON run configuration: schema, defaults, and strict parsing.

A run is described by one JSON object with the sections grid, fine_grid,
time, cp, beta, drift, noise, denoise, and iteration.  Every section is
optional; omitted keys fall back to the standard benchmark setup (60x60
inversion grid, 100x100 data grid, T = 1 with 100 steps, cp = 5, beta = 1,
smooth drift, no noise).  Unknown keys are rejected by name so that typos
fail loudly instead of silently running the defaults.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

from .grid import Grid2D, TimeGrid
from .inverse import InverseConfig
from .noise import DenoiseConfig, NoiseConfig
from .scenario import (
    DriftSpec,
    PiecewiseConstantDrift,
    ProblemSpec,
    SmoothDrift,
    benchmark_problem,
    bundled_mask_path,
    load_mask_drift,
)


class ConfigError(ValueError):
    """Configuration document cannot be turned into a run."""


_DEFAULTS = {
    "grid": {"nx": 60, "ny": 60},
    "fine_grid": {"nx": 100, "ny": 100},
    "time": {"T": 1.0, "nt": 100},
    "cp": 5.0,
    "beta": 1.0,
    "drift": {"variant": "Smooth"},
    "noise": {"delta": 0.0, "seed": 0},
    "denoise": {"enabled": False, "strength": None},
    "iteration": {"max_iters": 10, "tol": 1e-13},
}

_DRIFT_PARAM_KEYS = {
    "Smooth": ("base", "amplitude"),
    "PiecewiseConstant": ("cx", "cy", "wx", "wy", "inside", "outside"),
    "Mask": ("background", "increment"),
}


def _require_number(value, key, *, integer=False, minimum=None):
    ok = isinstance(value, int) if integer else isinstance(value, (int, float))
    if not ok or isinstance(value, bool):
        kind = "an integer" if integer else "a number"
        raise ConfigError(f"'{key}' must be {kind}, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"'{key}' must be >= {minimum}, got {value!r}")
    return value


def _merge_section(name, given, defaults):
    if not isinstance(given, dict):
        raise ConfigError(f"'{name}' must be an object, got {given!r}")
    for key in given:
        if key not in defaults:
            raise ConfigError(f"unknown key '{name}.{key}'")
    merged = dict(defaults)
    merged.update(given)
    return merged


def _parse_grid(name, section):
    nx = _require_number(section["nx"], f"{name}.nx", integer=True, minimum=3)
    ny = _require_number(section["ny"], f"{name}.ny", integer=True, minimum=3)
    return Grid2D(nx, ny)


def _parse_drift(section) -> tuple[DriftSpec, dict]:
    if not isinstance(section, dict):
        raise ConfigError(f"'drift' must be an object, got {section!r}")
    variant = section.get("variant")
    if variant not in _DRIFT_PARAM_KEYS:
        known = ", ".join(sorted(_DRIFT_PARAM_KEYS))
        raise ConfigError(f"unknown drift variant {variant!r} (expected one of {known})")
    allowed = {"variant", "params"} | ({"mask_path"} if variant == "Mask" else set())
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key 'drift.{key}'")
    params = section.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"'drift.params' must be an object, got {params!r}")
    for key in params:
        if key not in _DRIFT_PARAM_KEYS[variant]:
            raise ConfigError(f"unknown key 'drift.params.{key}' for variant {variant}")
        _require_number(params[key], f"drift.params.{key}")
    echo = {"variant": variant}
    if params:
        echo["params"] = dict(params)
    if variant == "Smooth":
        return SmoothDrift(**params), echo
    if variant == "PiecewiseConstant":
        return PiecewiseConstantDrift(**params), echo
    mask_path = section.get("mask_path") or bundled_mask_path()
    echo["mask_path"] = str(mask_path)
    try:
        drift = load_mask_drift(mask_path, **params)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"drift.mask_path: {exc}") from exc
    return drift, echo


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run description plus the normalized document for echoing."""

    grid: Grid2D
    fine_grid: Grid2D
    time: TimeGrid
    cp: float
    beta: float
    drift: DriftSpec
    noise: NoiseConfig
    denoise: DenoiseConfig
    iteration: InverseConfig
    document: dict = field(compare=False)

    def problem(self) -> ProblemSpec:
        return benchmark_problem(self.drift, cp=self.cp, beta=self.beta, time=self.time)

    def as_dict(self) -> dict:
        return copy.deepcopy(self.document)


def parse_config(doc: dict) -> RunConfig:
    """Validate a configuration object and apply defaults."""
    if not isinstance(doc, dict):
        raise ConfigError(f"configuration must be a JSON object, got {doc!r}")
    for key in doc:
        if key not in _DEFAULTS:
            raise ConfigError(f"unknown key '{key}'")

    grid_sec = _merge_section("grid", doc.get("grid", {}), _DEFAULTS["grid"])
    fine_sec = _merge_section("fine_grid", doc.get("fine_grid", {}), _DEFAULTS["fine_grid"])
    time_sec = _merge_section("time", doc.get("time", {}), _DEFAULTS["time"])
    noise_sec = _merge_section("noise", doc.get("noise", {}), _DEFAULTS["noise"])
    den_sec = _merge_section("denoise", doc.get("denoise", {}), _DEFAULTS["denoise"])
    iter_sec = _merge_section("iteration", doc.get("iteration", {}), _DEFAULTS["iteration"])

    grid = _parse_grid("grid", grid_sec)
    fine = _parse_grid("fine_grid", fine_sec)
    if fine.nx < grid.nx or fine.ny < grid.ny:
        raise ConfigError(
            f"fine_grid ({fine.nx}x{fine.ny}) must be at least as fine as "
            f"grid ({grid.nx}x{grid.ny})"
        )

    T = _require_number(time_sec["T"], "time.T")
    nt = _require_number(time_sec["nt"], "time.nt", integer=True, minimum=1)
    if T <= 0:
        raise ConfigError(f"'time.T' must be positive, got {T!r}")
    time = TimeGrid(float(T), nt)

    cp = float(_require_number(doc.get("cp", _DEFAULTS["cp"]), "cp"))
    beta = float(_require_number(doc.get("beta", _DEFAULTS["beta"]), "beta"))

    drift, drift_echo = _parse_drift(doc.get("drift", _DEFAULTS["drift"]))

    delta = float(_require_number(noise_sec["delta"], "noise.delta", minimum=0.0))
    seed = _require_number(noise_sec["seed"], "noise.seed", integer=True, minimum=0)
    noise = NoiseConfig(delta=delta, seed=seed)

    enabled = den_sec["enabled"]
    if not isinstance(enabled, bool):
        raise ConfigError(f"'denoise.enabled' must be true or false, got {enabled!r}")
    strength = den_sec["strength"]
    if strength is not None:
        strength = float(_require_number(strength, "denoise.strength", minimum=0.0))
    if enabled and strength is None and delta <= 0.0:
        raise ConfigError(
            "'denoise.strength' is required when denoising is enabled without noise"
        )
    denoise = DenoiseConfig(
        enabled=enabled,
        strength=strength,
        noise_delta=delta if delta > 0.0 else None,
    )

    max_iters = _require_number(iter_sec["max_iters"], "iteration.max_iters", integer=True, minimum=0)
    tol = float(_require_number(iter_sec["tol"], "iteration.tol", minimum=0.0))
    iteration = InverseConfig(max_iters=max_iters, tol=tol)

    document = {
        "grid": {"nx": grid.nx, "ny": grid.ny},
        "fine_grid": {"nx": fine.nx, "ny": fine.ny},
        "time": {"T": time.T, "nt": time.nt},
        "cp": cp,
        "beta": beta,
        "drift": drift_echo,
        "noise": {"delta": delta, "seed": seed},
        "denoise": {"enabled": enabled, "strength": strength},
        "iteration": {"max_iters": max_iters, "tol": tol},
    }
    return RunConfig(
        grid=grid,
        fine_grid=fine,
        time=time,
        cp=cp,
        beta=beta,
        drift=drift,
        noise=noise,
        denoise=denoise,
        iteration=iteration,
        document=document,
    )


def load_config(path) -> RunConfig:
    """Parse a JSON configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return parse_config(doc)


def default_config() -> RunConfig:
    """The standard benchmark setup with no noise."""
    return parse_config({})
