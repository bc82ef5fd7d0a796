"""JSON configuration parsing, defaults, and strict key checking."""

import json

import pytest

from drift_recover.config import ConfigError, default_config, load_config, parse_config
from drift_recover.scenario import MaskDrift, PiecewiseConstantDrift, SmoothDrift


def test_empty_document_gives_benchmark_defaults():
    cfg = default_config()
    assert (cfg.grid.nx, cfg.grid.ny) == (60, 60)
    assert (cfg.fine_grid.nx, cfg.fine_grid.ny) == (100, 100)
    assert (cfg.time.T, cfg.time.nt) == (1.0, 100)
    assert cfg.cp == 5.0
    assert cfg.beta == 1.0
    assert isinstance(cfg.drift, SmoothDrift)
    assert cfg.noise.delta == 0.0
    assert not cfg.denoise.enabled
    assert cfg.iteration.max_iters == 10
    assert cfg.iteration.tol == 1e-13


def test_unknown_top_level_key_named():
    with pytest.raises(ConfigError, match="frobnicate"):
        parse_config({"frobnicate": 1})


def test_unknown_nested_key_named():
    with pytest.raises(ConfigError, match="grid.nz"):
        parse_config({"grid": {"nx": 60, "nz": 60}})


def test_unknown_drift_variant_named():
    with pytest.raises(ConfigError, match="Swirly"):
        parse_config({"drift": {"variant": "Swirly"}})


def test_unknown_drift_param_named():
    with pytest.raises(ConfigError, match="drift.params.radius"):
        parse_config({"drift": {"variant": "PiecewiseConstant", "params": {"radius": 1}}})


def test_type_errors_rejected():
    with pytest.raises(ConfigError, match="grid.nx"):
        parse_config({"grid": {"nx": "sixty"}})
    with pytest.raises(ConfigError, match="'cp'"):
        parse_config({"cp": True})
    with pytest.raises(ConfigError, match="time.nt"):
        parse_config({"time": {"nt": 10.5}})


def test_fine_grid_must_dominate():
    with pytest.raises(ConfigError, match="fine_grid"):
        parse_config({"grid": {"nx": 80, "ny": 80}, "fine_grid": {"nx": 60, "ny": 60}})


def test_negative_delta_rejected():
    with pytest.raises(ConfigError, match="noise.delta"):
        parse_config({"noise": {"delta": -0.01}})


def test_nonpositive_horizon_rejected():
    with pytest.raises(ConfigError, match="time.T"):
        parse_config({"time": {"T": 0.0}})


def test_denoise_needs_strength_or_noise():
    with pytest.raises(ConfigError, match="denoise.strength"):
        parse_config({"denoise": {"enabled": True}})


def test_denoise_auto_wires_noise_level():
    cfg = parse_config({"noise": {"delta": 2e-2}, "denoise": {"enabled": True}})
    assert cfg.denoise.enabled
    assert cfg.denoise.strength is None
    assert cfg.denoise.noise_delta == 2e-2


def test_piecewise_params_applied():
    cfg = parse_config(
        {"drift": {"variant": "PiecewiseConstant", "params": {"inside": 2.0, "wx": 0.25}}}
    )
    assert isinstance(cfg.drift, PiecewiseConstantDrift)
    assert cfg.drift.inside == 2.0
    assert cfg.drift.wx == 0.25
    assert cfg.drift.outside == 1.0


def test_mask_variant_uses_bundled_file_by_default():
    cfg = parse_config({"drift": {"variant": "Mask"}})
    assert isinstance(cfg.drift, MaskDrift)
    assert cfg.drift.mask.values.max() == 1.0
    assert cfg.document["drift"]["mask_path"].endswith(".txt")


def test_echo_round_trips():
    doc = {
        "grid": {"nx": 40, "ny": 50},
        "cp": 3.5,
        "noise": {"delta": 1e-3, "seed": 9},
        "iteration": {"max_iters": 4, "tol": 1e-10},
    }
    cfg = parse_config(doc)
    again = parse_config(cfg.as_dict())
    assert again.document == cfg.document


def test_load_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"grid": {"nx": 30, "ny": 30}}), encoding="utf-8")
    cfg = load_config(path)
    assert cfg.grid.nx == 30


def test_load_config_bad_json(tmp_path):
    path = tmp_path / "run.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(path)


def test_problem_uses_configured_scalars():
    cfg = parse_config({"cp": 7.0, "beta": 0.5, "time": {"T": 0.5, "nt": 50}})
    spec = cfg.problem()
    assert spec.cp == 7.0
    assert spec.time.T == 0.5
    assert spec.time.nt == 50
