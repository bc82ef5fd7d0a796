"""Command-line workflows: exit codes, file inventories, reproducibility."""

import json

import numpy as np
import pytest

import drift_recover.cli as cli
from drift_recover.grid import Grid2D, ScalarField, read_field_csv, write_field_csv
from drift_recover.validation import ConvergenceStudy


def _manifest(out_dir):
    with open(out_dir / "manifest.json", encoding="utf-8") as fh:
        return json.load(fh)


def _ic_config(tmp_path, **extra):
    # small grid + short horizon keeps CLI round trips fast
    doc = {
        "grid": {"nx": 40, "ny": 40},
        "fine_grid": {"nx": 40, "ny": 40},
        "time": {"T": 1.0, "nt": 50},
    }
    doc.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def test_generate_data_inventory(tmp_path):
    cfg = _ic_config(tmp_path)
    out = tmp_path / "gen"
    rc = cli.main(
        ["generate-data", "--config", str(cfg), "--out", str(out), "--inverse-crime", "--quiet"]
    )
    assert rc == 0
    manifest = _manifest(out)
    for name in manifest["files"].values():
        assert (out / name).exists()
    g = read_field_csv(out / "g.csv")
    assert g.grid.n_nodes == 1600
    assert manifest["rng"]["generator"].startswith("numpy.random")


def test_generate_data_restricts_to_inversion_grid(tmp_path):
    cfg = _ic_config(tmp_path, fine_grid={"nx": 60, "ny": 60})
    out = tmp_path / "gen"
    rc = cli.main(["generate-data", "--config", str(cfg), "--out", str(out), "--quiet"])
    assert rc == 0
    assert read_field_csv(out / "g.csv").grid.nx == 40


def test_generate_data_noise_reproducible(tmp_path):
    cfg = _ic_config(tmp_path, noise={"delta": 2e-2, "seed": 42})
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        rc = cli.main(
            ["generate-data", "--config", str(cfg), "--out", str(out), "--inverse-crime", "--quiet"]
        )
        assert rc == 0
    assert (out1 / "g.csv").read_bytes() == (out2 / "g.csv").read_bytes()
    assert (out1 / "noise.csv").exists()


def test_invert_writes_iterates_and_convergence(tmp_path):
    cfg = _ic_config(tmp_path)
    gen = tmp_path / "gen"
    cli.main(["generate-data", "--config", str(cfg), "--out", str(gen), "--inverse-crime", "--quiet"])
    out = tmp_path / "inv"
    rc = cli.main(
        [
            "invert",
            "--config", str(cfg),
            "--out", str(out),
            "--max-iters", "2",
            "--quiet",
            str(gen / "g.csv"),
        ]
    )
    assert rc == 0
    for k in range(3):
        assert (out / f"q_{k:03d}.csv").exists()
    rows = (out / "convergence.csv").read_text().strip().splitlines()
    assert rows[0] == "k,increment,rel_err"
    assert len(rows) == 4
    assert rows[1].startswith("0,,")
    manifest = _manifest(out)
    assert manifest["stop_reason"] in ("Tolerance", "MaxIters")


def test_invert_zero_iterations_emits_initial_guess_only(tmp_path):
    cfg = _ic_config(tmp_path)
    gen = tmp_path / "gen"
    cli.main(["generate-data", "--config", str(cfg), "--out", str(gen), "--inverse-crime", "--quiet"])
    out = tmp_path / "inv0"
    rc = cli.main(
        [
            "invert",
            "--config", str(cfg),
            "--out", str(out),
            "--max-iters", "0",
            "--quiet",
            str(gen / "g.csv"),
        ]
    )
    assert rc == 0
    assert (out / "q_000.csv").exists()
    assert not (out / "q_001.csv").exists()


def test_invert_grid_mismatch_exits_2(tmp_path, capsys):
    cfg = _ic_config(tmp_path)
    bad = tmp_path / "bad.csv"
    write_field_csv(ScalarField(Grid2D(10, 10), np.ones(100)), bad)
    rc = cli.main(["invert", "--config", str(cfg), "--out", str(tmp_path / "o"), str(bad)])
    assert rc == 2
    assert "does not match" in capsys.readouterr().err


def test_invert_degenerate_data_exits_5(tmp_path, capsys):
    cfg = _ic_config(tmp_path)
    flat = tmp_path / "flat.csv"
    write_field_csv(ScalarField(Grid2D(40, 40), np.full(1600, 3.0)), flat)
    rc = cli.main(["invert", "--config", str(cfg), "--out", str(tmp_path / "o"), str(flat)])
    assert rc == 5
    assert "degenerate" in capsys.readouterr().err


def test_bad_config_exits_2_naming_key(tmp_path, capsys):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"iteration": {"max_itters": 5}}), encoding="utf-8")
    rc = cli.main(["generate-data", "--config", str(path), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "max_itters" in capsys.readouterr().err


def test_unknown_experiment_exits_2(tmp_path, capsys):
    rc = cli.main(["experiment", "vortex", "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "vortex" in capsys.readouterr().err


def test_bad_thread_env_exits_2(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("DRIFT_RECOVER_THREADS", "many")
    rc = cli.main(["experiment", "smooth", "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "DRIFT_RECOVER_THREADS" in capsys.readouterr().err


def test_study_csv_layout(tmp_path):
    study = ConvergenceStudy(
        parameter="h",
        values=[0.1, 0.05],
        errors_l2=[1.0, 0.25],
        errors_linf=[2.0, 0.5],
    )
    path = tmp_path / "study.csv"
    cli._write_study_csv(path, study)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "h,error_l2,error_linf,order_l2"
    assert rows[1].endswith(",")
    assert rows[2].endswith(",2.0")


def test_study_csv_single_row_has_no_orders(tmp_path):
    study = ConvergenceStudy(parameter="h", values=[0.1], errors_l2=[1.0], errors_linf=[2.0])
    path = tmp_path / "study.csv"
    cli._write_study_csv(path, study)
    rows = path.read_text().strip().splitlines()
    assert len(rows) == 2
    assert rows[1] == "0.1,1.0,2.0,"


def test_mms_command_writes_studies(tmp_path, monkeypatch):
    tiny = ConvergenceStudy(
        parameter="h", values=[0.1, 0.05], errors_l2=[1.0, 0.25], errors_linf=[2.0, 0.5]
    )
    monkeypatch.setattr(cli, "mms_spatial_study", lambda **kw: tiny)
    monkeypatch.setattr(cli, "mms_temporal_study", lambda **kw: tiny)
    out = tmp_path / "mms"
    rc = cli.main(["mms", "--out", str(out), "--quiet"])
    assert rc == 0
    assert (out / "mms_spatial.csv").exists()
    assert (out / "mms_temporal.csv").exists()
    assert _manifest(out)["files"]["spatial"] == "mms_spatial.csv"


def test_experiment_noise_only_layout(tmp_path):
    out = tmp_path / "exp"
    rc = cli.main(
        [
            "experiment", "smooth",
            "--out", str(out),
            "--seeds", "3",
            "--noise-only",
            "--max-iters", "1",
            "--quiet",
        ]
    )
    assert rc == 0
    manifest = _manifest(out)
    assert "noise_free" not in manifest["runs"]
    assert len(manifest["runs"]) == 4
    for label in manifest["runs"]:
        run_dir = out / label
        assert (run_dir / "q_000.csv").exists()
        assert (run_dir / "q_001.csv").exists()
        assert (run_dir / "convergence.csv").exists()
        run_manifest = _manifest(run_dir)
        assert run_manifest["stop_reason"] in ("Tolerance", "MaxIters")
        # truth is known inside an experiment, so rel_err cells are filled
        rows = (run_dir / "convergence.csv").read_text().strip().splitlines()
        assert not rows[1].endswith(",")
    assert (out / "q_true.csv").exists()
    assert (out / "g.csv").exists()
