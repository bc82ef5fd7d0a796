"""Drift recovery from terminal data by monotone fixed-point iteration.

Writing the equation at the final time and solving for the drift gives the
update operator

    K(psi) = (f - du/dt(. , T; psi) + lap(g) - cp * g) / (dg/dx)

where u(. , . ; psi) solves the forward problem with drift psi and g is the
terminal observation.  The true drift is a fixed point of K; starting from
the guess obtained by dropping the du/dt term and iterating produces a
sequence that decreases toward it when the data are consistent.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .forward import SolverFailure, solve_forward
from .grid import ScalarField, apply_dx, apply_laplacian, norm_l2
from .noise import DenoiseConfig, denoise
from .scenario import ProblemSpec
from .validation import rel_err

DX_FLOOR_REL = 1e-3


class DegenerateDataError(RuntimeError):
    """The observation has no positive x-slope anywhere; the update operator is undefined."""


class StopReason(str, enum.Enum):
    TOLERANCE = "Tolerance"
    MAX_ITERS = "MaxIters"
    DIVERGENCE = "Divergence"


@dataclass(frozen=True)
class InverseConfig:
    max_iters: int = 10
    tol: float = 1e-13
    dx_floor_rel: float = DX_FLOOR_REL
    project_to_domain: bool = True

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be nonnegative, got {self.max_iters}")
        if self.tol < 0:
            raise ValueError(f"tolerance must be nonnegative, got {self.tol}")


@dataclass
class ObservationData:
    """Terminal observation and the derived fields entering the update operator.

    dx_g is floored away from zero at dx_floor_rel times its maximum, so
    the division in K stays stable where the slope degenerates.
    """

    g: ScalarField
    lap_g: ScalarField
    dx_g: ScalarField
    f: ScalarField
    cp: float


def build_observation(
    g: ScalarField,
    spec: ProblemSpec,
    denoise_cfg: DenoiseConfig | None = None,
    dx_floor_rel: float = DX_FLOOR_REL,
) -> ObservationData:
    """Differentiate (optionally denoised) terminal data and bundle the operator inputs."""
    if denoise_cfg is not None and denoise_cfg.enabled:
        g = denoise(g, denoise_cfg, boundary=spec.boundary, t=spec.time.T)
    lap_g = apply_laplacian(g)
    dx_raw = apply_dx(g)
    peak = float(dx_raw.values.max())
    if peak <= 0.0:
        raise DegenerateDataError(
            "terminal observation is nowhere increasing in x; cannot divide by its slope"
        )
    dx_g = ScalarField(g.grid, np.maximum(dx_raw.values, dx_floor_rel * peak))
    f = spec.source_field(g.grid, spec.time.T)
    return ObservationData(g=g, lap_g=lap_g, dx_g=dx_g, f=f, cp=spec.cp)


def _extend_to_frame(vals2d: np.ndarray) -> None:
    # The boundary frame has no drift sensitivity: those rows of the forward
    # system carry boundary data, not the equation, so the update quotient is
    # meaningless there (and the Dirichlet-pinned discrete error makes it O(1)
    # regardless of h).  Copy the adjacent interior values instead; copying
    # also preserves pointwise order, which polynomial extrapolation would not.
    vals2d[0, :] = vals2d[1, :]
    vals2d[-1, :] = vals2d[-2, :]
    vals2d[:, 0] = vals2d[:, 1]
    vals2d[:, -1] = vals2d[:, -2]


def initial_guess(obs: ObservationData) -> ScalarField:
    """Drift guess from the terminal equation with the du/dt term dropped."""
    grid = obs.g.grid
    vals = (obs.f.values + obs.lap_g.values - obs.cp * obs.g.values) / obs.dx_g.values
    vals = vals.reshape(grid.ny, grid.nx)
    _extend_to_frame(vals)
    return ScalarField(grid, vals)


def apply_K(
    psi: ScalarField,
    obs: ObservationData,
    spec: ProblemSpec,
    cap: ScalarField | None = None,
) -> ScalarField:
    """One application of the update operator; cap clips the result from above."""
    sol = solve_forward(spec, psi)
    grid = psi.grid
    vals = (
        obs.f.values - sol.du_dt_T.values + obs.lap_g.values - obs.cp * obs.g.values
    ) / obs.dx_g.values
    vals = vals.reshape(grid.ny, grid.nx)
    _extend_to_frame(vals)
    vals = vals.ravel()
    if cap is not None:
        vals = np.minimum(vals, cap.values)
    return ScalarField(grid, vals)


@dataclass
class IterationReport:
    """Everything produced by the fixed-point loop.

    iterates[k] is the k-th drift estimate (iterates[0] is the initial
    guess); increments[k-1] = ||iterates[k] - iterates[k-1]||; rel_errors
    follows the iterates when a reference drift was supplied.
    """

    iterates: list[ScalarField]
    increments: list[float]
    stop_reason: StopReason
    rel_errors: list[float] | None = None

    @property
    def final(self) -> ScalarField:
        return self.iterates[-1]

    @property
    def iterations_run(self) -> int:
        return len(self.iterates) - 1


def iterate(
    obs: ObservationData,
    spec: ProblemSpec,
    cfg: InverseConfig = InverseConfig(),
    q_true: ScalarField | None = None,
) -> IterationReport:
    """Run the fixed-point loop from the initial guess.

    Stops on the increment tolerance, the iteration budget, or divergence
    (a non-finite iterate, or the increment growing by more than 10x on
    three consecutive iterations).
    """
    q = initial_guess(obs)
    cap = q if cfg.project_to_domain else None
    iterates = [q]
    increments: list[float] = []
    rel_errors = [rel_err(q, q_true)] if q_true is not None else None
    reason = StopReason.MAX_ITERS
    growth_streak = 0
    for k in range(cfg.max_iters):
        try:
            q_next = apply_K(iterates[-1], obs, spec, cap=cap)
        except SolverFailure as exc:
            raise SolverFailure(f"forward solve failed during iteration {k + 1}: {exc}") from exc
        inc = norm_l2(ScalarField(q.grid, q_next.values - iterates[-1].values))
        iterates.append(q_next)
        increments.append(inc)
        if rel_errors is not None:
            rel_errors.append(rel_err(q_next, q_true))
        if not np.all(np.isfinite(q_next.values)) or not np.isfinite(inc):
            reason = StopReason.DIVERGENCE
            break
        if inc <= cfg.tol:
            reason = StopReason.TOLERANCE
            break
        if len(increments) >= 2 and inc > 10.0 * increments[-2]:
            growth_streak += 1
        else:
            growth_streak = 0
        if growth_streak >= 3:
            reason = StopReason.DIVERGENCE
            break
    return IterationReport(
        iterates=iterates, increments=increments, stop_reason=reason, rel_errors=rel_errors
    )
