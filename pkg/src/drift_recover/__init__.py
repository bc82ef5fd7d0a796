"""Recover the drift coefficient of a 2D convection-diffusion-reaction equation from terminal data."""

__version__ = "0.1.0"

from .grid import (
    BoundaryTag,
    Grid2D,
    ScalarField,
    TimeGrid,
    apply_dx,
    apply_laplacian,
    boundary_tags,
    field_from_function,
    norm_l2,
    norm_linf,
    read_field_csv,
    read_mask,
    restrict,
    write_field_csv,
    write_mask,
)
from .scenario import (
    BoundarySpec,
    MaskDrift,
    PiecewiseConstantDrift,
    ProblemSpec,
    SmoothDrift,
    TabulatedDrift,
    benchmark_problem,
    bundled_mask_path,
    character_drift,
    character_mask,
    constant_problem,
    correct_initial_data,
    evaluate_drift,
    exponential_boundary,
    load_mask_drift,
)
from .forward import ForwardSolution, SolverFailure, SolverStats, solve_forward, terminal_derivative
from .inverse import (
    DegenerateDataError,
    InverseConfig,
    IterationReport,
    ObservationData,
    StopReason,
    apply_K,
    build_observation,
    initial_guess,
    iterate,
)
from .noise import DenoiseConfig, NoiseConfig, add_noise, auto_strength, denoise
from .validation import (
    ConvergenceStudy,
    DiagnosticsReport,
    manufactured_problem,
    manufactured_solution,
    mms_spatial_study,
    mms_temporal_study,
    positivity_diagnostics,
    rel_err,
)
from .config import ConfigError, RunConfig, default_config, load_config, parse_config

__all__ = [
    "BoundarySpec",
    "BoundaryTag",
    "ConfigError",
    "ConvergenceStudy",
    "DegenerateDataError",
    "DenoiseConfig",
    "DiagnosticsReport",
    "ForwardSolution",
    "Grid2D",
    "InverseConfig",
    "IterationReport",
    "MaskDrift",
    "NoiseConfig",
    "ObservationData",
    "PiecewiseConstantDrift",
    "ProblemSpec",
    "RunConfig",
    "ScalarField",
    "SmoothDrift",
    "SolverFailure",
    "SolverStats",
    "StopReason",
    "TabulatedDrift",
    "TimeGrid",
    "add_noise",
    "apply_K",
    "apply_dx",
    "apply_laplacian",
    "auto_strength",
    "benchmark_problem",
    "boundary_tags",
    "build_observation",
    "bundled_mask_path",
    "character_drift",
    "character_mask",
    "constant_problem",
    "correct_initial_data",
    "default_config",
    "denoise",
    "evaluate_drift",
    "exponential_boundary",
    "field_from_function",
    "initial_guess",
    "iterate",
    "load_config",
    "load_mask_drift",
    "manufactured_problem",
    "manufactured_solution",
    "mms_spatial_study",
    "mms_temporal_study",
    "norm_l2",
    "norm_linf",
    "parse_config",
    "positivity_diagnostics",
    "read_field_csv",
    "read_mask",
    "rel_err",
    "restrict",
    "solve_forward",
    "terminal_derivative",
    "write_field_csv",
    "write_mask",
    "__version__",
]
