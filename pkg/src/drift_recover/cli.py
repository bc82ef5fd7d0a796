"""Command-line front end: data generation, inversion, verification, experiments.

Exit codes are stable: 0 success, 2 configuration error, 3 forward solver
failure, 4 divergent iteration, 5 degenerate terminal data.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import time as _time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .config import ConfigError, RunConfig, default_config, load_config, parse_config
from .forward import SolverFailure, solve_forward
from .grid import read_field_csv, restrict, write_field_csv
from .inverse import (
    DegenerateDataError,
    InverseConfig,
    IterationReport,
    StopReason,
    build_observation,
    iterate,
)
from .noise import GENERATOR, add_noise
from .scenario import evaluate_drift
from .validation import mms_spatial_study, mms_temporal_study, rel_err

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_DIVERGED = 4
EXIT_DEGENERATE = 5

# delta values for the standard noise sweep: 1%, 0.1%, 0.01%, 3%
NOISE_LEVELS = (2e-2, 2e-3, 2e-4, 6e-2)

EXPERIMENT_DRIFTS = {
    "smooth": {"variant": "Smooth"},
    "piecewise": {"variant": "PiecewiseConstant"},
    "character": {"variant": "Mask"},
}


class _CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _say(args, message):
    if not args.quiet:
        print(message)


def _now():
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _write_manifest(out_dir: Path, payload: dict):
    # written last, atomically: a manifest present means the run completed
    payload = dict(payload, version=__version__, written=_now())
    tmp = out_dir / "manifest.json.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, out_dir / "manifest.json")


def _solver_stats(solution):
    s = solution.stats
    return {
        "n_unknowns": s.n_unknowns,
        "steps": s.steps,
        "factorize_seconds": s.factorize_seconds,
        "solve_seconds": s.solve_seconds,
    }


def _write_convergence_csv(path: Path, report: IterationReport):
    lines = ["k,increment,rel_err"]
    for k in range(len(report.iterates)):
        inc = "" if k == 0 else repr(report.increments[k - 1])
        rel = "" if report.rel_errors is None else repr(report.rel_errors[k])
        lines.append(f"{k},{inc},{rel}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _load_run_config(args) -> RunConfig:
    try:
        cfg = load_config(args.config) if args.config else default_config()
    except ConfigError as exc:
        raise _CliError(EXIT_CONFIG, f"config error: {exc}")
    overrides = {}
    if getattr(args, "max_iters", None) is not None:
        overrides["max_iters"] = args.max_iters
    if getattr(args, "tol", None) is not None:
        overrides["tol"] = args.tol
    if overrides:
        doc = cfg.as_dict()
        doc["iteration"].update(overrides)
        try:
            cfg = parse_config(doc)
        except ConfigError as exc:
            raise _CliError(EXIT_CONFIG, f"config error: {exc}")
    return cfg


def _generate(cfg: RunConfig, *, inverse_crime: bool):
    """Fine-grid solve, restriction, optional noise. Returns fields + stats."""
    spec = cfg.problem()
    data_grid = cfg.grid if inverse_crime else cfg.fine_grid
    q_fine = evaluate_drift(cfg.drift, data_grid)
    solution = solve_forward(spec, q_fine)
    g = solution.u_T if inverse_crime else restrict(solution.u_T, cfg.grid)
    noisy, noise_field = add_noise(g, cfg.noise)
    return {
        "spec": spec,
        "g_clean": g,
        "g": noisy,
        "noise": noise_field if cfg.noise.delta > 0 else None,
        "q_true": evaluate_drift(cfg.drift, cfg.grid),
        "stats": _solver_stats(solution),
    }


def cmd_generate_data(args) -> int:
    cfg = _load_run_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    t0 = _time.perf_counter()
    try:
        run = _generate(cfg, inverse_crime=args.inverse_crime)
    except SolverFailure as exc:
        raise _CliError(EXIT_SOLVER, f"forward solve failed: {exc}")
    files = {"g": "g.csv", "q_true": "q_true.csv"}
    write_field_csv(run["g"], out / files["g"])
    write_field_csv(run["q_true"], out / files["q_true"])
    if run["noise"] is not None:
        files["noise"] = "noise.csv"
        write_field_csv(run["noise"], out / files["noise"])
    _write_manifest(
        out,
        {
            "command": "generate-data",
            "config": cfg.as_dict(),
            "inverse_crime": args.inverse_crime,
            "rng": {"seed": cfg.noise.seed, "generator": GENERATOR},
            "started": started,
            "seconds": _time.perf_counter() - t0,
            "solver": run["stats"],
            "files": files,
        },
    )
    _say(args, f"wrote {', '.join(sorted(files.values()))} to {out}")
    return EXIT_OK


def _run_inversion(cfg: RunConfig, g, out: Path, *, q_true=None, quiet=True):
    """Shared by invert and experiment: observation, iteration, CSV dump."""
    spec = cfg.problem()
    obs = build_observation(g, spec, denoise_cfg=cfg.denoise)
    report = iterate(obs, spec, cfg.iteration, q_true=q_true)
    files = {}
    for k, q in enumerate(report.iterates):
        name = f"q_{k:03d}.csv"
        write_field_csv(q, out / name)
        files[f"iterate_{k}"] = name
    files["convergence"] = "convergence.csv"
    _write_convergence_csv(out / files["convergence"], report)
    return report, files


def cmd_invert(args) -> int:
    cfg = _load_run_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    t0 = _time.perf_counter()
    try:
        g = read_field_csv(args.data)
    except (OSError, ValueError) as exc:
        raise _CliError(EXIT_CONFIG, f"cannot read data file: {exc}")
    if (g.grid.nx, g.grid.ny) != (cfg.grid.nx, cfg.grid.ny):
        raise _CliError(
            EXIT_CONFIG,
            f"data grid {g.grid.nx}x{g.grid.ny} does not match configured "
            f"inversion grid {cfg.grid.nx}x{cfg.grid.ny}",
        )
    try:
        report, files = _run_inversion(cfg, g, out)
    except DegenerateDataError as exc:
        raise _CliError(EXIT_DEGENERATE, f"degenerate data: {exc}")
    except SolverFailure as exc:
        raise _CliError(EXIT_SOLVER, f"forward solve failed: {exc}")
    _write_manifest(
        out,
        {
            "command": "invert",
            "config": cfg.as_dict(),
            "data": str(args.data),
            "stop_reason": report.stop_reason.value,
            "iterations_run": report.iterations_run,
            "rng": {"seed": cfg.noise.seed, "generator": GENERATOR},
            "started": started,
            "seconds": _time.perf_counter() - t0,
            "files": files,
        },
    )
    _say(
        args,
        f"{report.stop_reason.value} after {report.iterations_run} iterations; "
        f"outputs in {out}",
    )
    if report.stop_reason is StopReason.DIVERGENCE:
        return EXIT_DIVERGED
    return EXIT_OK


def _write_study_csv(path: Path, study):
    lines = [f"{study.parameter},error_l2,error_linf,order_l2"]
    orders = study.observed_orders
    for row, (value, e2, einf) in enumerate(
        zip(study.values, study.errors_l2, study.errors_linf)
    ):
        order = "" if row == 0 else repr(orders[row - 1])
        lines.append(f"{value!r},{e2!r},{einf!r},{order}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_mms(args) -> int:
    cfg = _load_run_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    t0 = _time.perf_counter()
    spatial = mms_spatial_study(cp=cfg.cp, beta=cfg.beta)
    _say(args, f"spatial orders: {[round(o, 3) for o in spatial.observed_orders]}")
    temporal = mms_temporal_study(cp=cfg.cp, beta=cfg.beta)
    _say(args, f"temporal orders: {[round(o, 3) for o in temporal.observed_orders]}")
    files = {"spatial": "mms_spatial.csv", "temporal": "mms_temporal.csv"}
    _write_study_csv(out / files["spatial"], spatial)
    _write_study_csv(out / files["temporal"], temporal)
    _write_manifest(
        out,
        {
            "command": "mms",
            "config": cfg.as_dict(),
            "started": started,
            "seconds": _time.perf_counter() - t0,
            "files": files,
        },
    )
    return EXIT_OK


def _experiment_runs(args):
    seeds = [int(tok) for tok in args.seeds.split(",") if tok.strip() != ""]
    if not seeds:
        raise _CliError(EXIT_CONFIG, f"no seeds in {args.seeds!r}")
    runs = []
    if not args.noise_only:
        runs.append(("noise_free", 0.0, None))
    for delta in NOISE_LEVELS:
        for seed in seeds:
            runs.append((f"delta_{delta:.0e}_seed_{seed}", delta, seed))
    return runs


def _worker_count():
    env = os.environ.get("DRIFT_RECOVER_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise _CliError(EXIT_CONFIG, f"DRIFT_RECOVER_THREADS must be an integer, got {env!r}")
        if n < 1:
            raise _CliError(EXIT_CONFIG, f"DRIFT_RECOVER_THREADS must be >= 1, got {n}")
        return n
    return min(4, os.cpu_count() or 1)


def cmd_experiment(args) -> int:
    if args.name not in EXPERIMENT_DRIFTS:
        known = ", ".join(sorted(EXPERIMENT_DRIFTS))
        raise _CliError(EXIT_CONFIG, f"unknown experiment {args.name!r} (expected one of {known})")
    base_doc = {"drift": EXPERIMENT_DRIFTS[args.name]}
    if args.max_iters is not None:
        base_doc["iteration"] = {"max_iters": args.max_iters}
    if args.tol is not None:
        base_doc.setdefault("iteration", {})["tol"] = args.tol
    try:
        base = parse_config(base_doc)
    except ConfigError as exc:
        raise _CliError(EXIT_CONFIG, f"config error: {exc}")
    workers = _worker_count()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    t0 = _time.perf_counter()

    # one clean fine-grid solve shared by every noise realization
    try:
        clean = _generate(base, inverse_crime=args.inverse_crime)
    except SolverFailure as exc:
        raise _CliError(EXIT_SOLVER, f"forward solve failed: {exc}")
    write_field_csv(clean["q_true"], out / "q_true.csv")
    write_field_csv(clean["g_clean"], out / "g.csv")

    def one_run(label, delta, seed):
        doc = base.as_dict()
        doc["noise"] = {"delta": delta, "seed": 0 if seed is None else seed}
        doc["denoise"] = {"enabled": delta > 0.0, "strength": None}
        cfg = parse_config(doc)
        run_dir = out / label
        run_dir.mkdir(exist_ok=True)
        noisy, _ = add_noise(clean["g_clean"], cfg.noise)
        report, files = _run_inversion(cfg, noisy, run_dir, q_true=clean["q_true"])
        _write_manifest(
            run_dir,
            {
                "command": "experiment",
                "experiment": args.name,
                "run": label,
                "config": cfg.as_dict(),
                "stop_reason": report.stop_reason.value,
                "iterations_run": report.iterations_run,
                "final_rel_err": report.rel_errors[-1],
                "rng": {"seed": cfg.noise.seed, "generator": GENERATOR},
                "files": files,
            },
        )
        return label, report

    runs = _experiment_runs(args)
    results = {}
    errors = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(one_run, *run): run[0] for run in runs}
        for future, label in futures.items():
            try:
                results[label] = future.result()[1]
            except (DegenerateDataError, SolverFailure) as exc:
                errors.append((label, exc))
    for label, exc in errors:
        print(f"error: run {label}: {exc}", file=sys.stderr)
    if errors:
        exc = errors[0][1]
        code = EXIT_DEGENERATE if isinstance(exc, DegenerateDataError) else EXIT_SOLVER
        raise _CliError(code, f"{len(errors)} of {len(runs)} runs failed")

    summary = {
        label: {
            "stop_reason": rep.stop_reason.value,
            "iterations_run": rep.iterations_run,
            "final_rel_err": rep.rel_errors[-1],
        }
        for label, rep in sorted(results.items())
    }
    for label, row in summary.items():
        _say(args, f"{label}: RelErr {row['final_rel_err']:.4%} ({row['stop_reason']})")
    _write_manifest(
        out,
        {
            "command": "experiment",
            "experiment": args.name,
            "config": base.as_dict(),
            "inverse_crime": args.inverse_crime,
            "seeds": args.seeds,
            "noise_only": args.noise_only,
            "started": started,
            "seconds": _time.perf_counter() - t0,
            "solver": clean["stats"],
            "runs": summary,
            "files": {"q_true": "q_true.csv", "g_clean": "g.csv"},
        },
    )
    if any(rep.stop_reason is StopReason.DIVERGENCE for rep in results.values()):
        return EXIT_DIVERGED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drift-recover",
        description="Recover a convective drift coefficient from terminal observations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, iteration=False):
        p.add_argument("--config", help="JSON run configuration (defaults used if omitted)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
        if iteration:
            p.add_argument("--max-iters", type=int, help="override iteration.max_iters")
            p.add_argument("--tol", type=float, help="override iteration.tol")

    p = sub.add_parser("generate-data", help="solve forward and write terminal data")
    common(p)
    p.add_argument(
        "--inverse-crime",
        action="store_true",
        help="generate data on the inversion grid itself (no restriction)",
    )
    p.set_defaults(fn=cmd_generate_data)

    p = sub.add_parser("invert", help="reconstruct the drift from a terminal data file")
    common(p, iteration=True)
    p.add_argument("data", help="terminal data CSV from generate-data")
    p.set_defaults(fn=cmd_invert)

    p = sub.add_parser("mms", help="manufactured-solution convergence study")
    common(p)
    p.set_defaults(fn=cmd_mms)

    p = sub.add_parser("experiment", help="full reconstruction pipeline at all noise levels")
    common(p, iteration=True)
    p.add_argument("name", help="smooth | piecewise | character")
    p.add_argument("--seeds", default="0", help="comma-separated noise seeds (default 0)")
    p.add_argument("--noise-only", action="store_true", help="skip the noise-free run")
    p.add_argument(
        "--inverse-crime",
        action="store_true",
        help="generate data on the inversion grid itself",
    )
    p.set_defaults(fn=cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
