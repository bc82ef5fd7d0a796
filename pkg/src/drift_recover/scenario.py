"""Problem definitions: drift coefficients, boundary data, sources, initial data.

The equation solved throughout is

    du/dt - lap(u) + q(x, y) * du/dx + cp * u = f   on (0,1)^2 x (0,T]

with Dirichlet data on the horizontal edges y = 0 (bottom) and y = 1 (top)
and Neumann data in the outward normal direction on the vertical edges
x = 1 (right) and x = 0 (left, where the outward normal is -x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Union

import numpy as np

from .grid import Grid2D, ScalarField, TimeGrid, field_from_function, read_mask, sample_nearest


# ---------------------------------------------------------------------------
# drift coefficients


@dataclass(frozen=True)
class SmoothDrift:
    """base + amplitude * sin(pi x) * sin(pi y)."""

    base: float = 1.0
    amplitude: float = 1.0

    def values_at(self, x, y):
        return self.base + self.amplitude * np.sin(np.pi * x) * np.sin(np.pi * y)


@dataclass(frozen=True)
class PiecewiseConstantDrift:
    """inside-value on an axis-aligned box, outside-value elsewhere.

    The box is |x - cx| <= wx and |y - cy| <= wy.
    """

    cx: float = 0.6
    cy: float = 0.4
    wx: float = 0.18
    wy: float = 0.18
    inside: float = 1.4
    outside: float = 1.0

    def values_at(self, x, y):
        box = (np.abs(x - self.cx) <= self.wx) & (np.abs(y - self.cy) <= self.wy)
        return np.where(box, self.inside, self.outside)


@dataclass(frozen=True)
class MaskDrift:
    """background + increment on the support of a binary mask field."""

    mask: ScalarField
    background: float = 1.0
    increment: float = 0.4

    def __post_init__(self):
        if not np.isin(self.mask.values, (0.0, 1.0)).all():
            raise ValueError("mask field values must be 0 or 1")


@dataclass(frozen=True)
class TabulatedDrift:
    """Drift given directly as nodal values; resample opts into bilinear regridding."""

    field: ScalarField
    resample: bool = False


DriftSpec = Union[SmoothDrift, PiecewiseConstantDrift, MaskDrift, TabulatedDrift]


def evaluate_drift(drift: DriftSpec, grid: Grid2D) -> ScalarField:
    """Realize a drift specification as nodal values on a grid."""
    if isinstance(drift, (SmoothDrift, PiecewiseConstantDrift)):
        return field_from_function(grid, drift.values_at)
    if isinstance(drift, MaskDrift):
        mask = drift.mask
        if mask.grid != grid:
            mask = sample_nearest(mask, grid)
        return ScalarField(grid, drift.background + drift.increment * mask.values)
    if isinstance(drift, TabulatedDrift):
        if drift.field.grid == grid:
            return drift.field.copy()
        if not drift.resample:
            raise ValueError(
                f"tabulated drift lives on {drift.field.grid.nx}x{drift.field.grid.ny}, "
                f"requested {grid.nx}x{grid.ny}; pass resample=True to regrid"
            )
        from .grid import sample_bilinear

        return sample_bilinear(drift.field, grid)
    raise TypeError(f"unknown drift specification {type(drift).__name__}")


def character_mask(
    grid: Grid2D,
    *,
    box=(0.20, 0.80, 0.33, 0.67),
    thickness: float = 0.08,
    bar_half_width: float = 0.04,
    bar_extent=(0.15, 0.85),
) -> ScalarField:
    """Binary mask of a blocky glyph: a rectangle frame crossed by a vertical center bar.

    The frame leaves two inner holes, one on each side of the bar.  Evaluating
    the same geometry on any grid keeps fine- and coarse-grid drifts consistent.
    """
    x0, x1, y0, y1 = box
    X, Y = grid.meshes()
    outer = (X >= x0) & (X <= x1) & (Y >= y0) & (Y <= y1)
    inner = (
        (X >= x0 + thickness)
        & (X <= x1 - thickness)
        & (Y >= y0 + thickness)
        & (Y <= y1 - thickness)
    )
    bar = (np.abs(X - 0.5) <= bar_half_width) & (Y >= bar_extent[0]) & (Y <= bar_extent[1])
    return ScalarField(grid, ((outer & ~inner) | bar).astype(float))


def character_drift(grid: Grid2D, background: float = 1.0, increment: float = 0.4) -> MaskDrift:
    """Glyph-shaped drift realized on the given grid."""
    return MaskDrift(mask=character_mask(grid), background=background, increment=increment)


def bundled_mask_path() -> str:
    """Path of the sample glyph mask shipped with the package (60x60)."""
    return str(resources.files("drift_recover").joinpath("data", "char_mask_60x60.txt"))


def load_mask_drift(path, background: float = 1.0, increment: float = 0.4) -> MaskDrift:
    return MaskDrift(mask=read_mask(path), background=background, increment=increment)


# ---------------------------------------------------------------------------
# boundary data


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary data as vectorized callables of (coordinate, t).

    bottom, top: Dirichlet values on y = 0 and y = 1 as functions of (x, t).
    right, left: outward-normal derivative data on x = 1 and x = 0 as
    functions of (y, t); on the left edge the outward normal is -x, so the
    datum there equals -du/dx.
    """

    bottom: Callable
    top: Callable
    right: Callable
    left: Callable
    beta: float | None = None


def exponential_boundary(beta: float = 1.0) -> BoundarySpec:
    """Boundary family generated by a(t) = exp(beta*t) around u = a(t)*exp(x).

    Dirichlet edges carry a(t)*exp(x); the right edge carries du/dn = a(t)*e,
    the left edge du/dn = -a(t).
    """
    e1 = math.e

    def a(t):
        return math.exp(beta * t)

    return BoundarySpec(
        bottom=lambda x, t: a(t) * np.exp(x),
        top=lambda x, t: a(t) * np.exp(x),
        right=lambda y, t: np.full_like(np.asarray(y, dtype=float), a(t) * e1),
        left=lambda y, t: np.full_like(np.asarray(y, dtype=float), -a(t)),
        beta=beta,
    )


def constant_boundary(value: float, flux: float = 0.0) -> BoundarySpec:
    """Constant Dirichlet value on both horizontal edges, constant normal flux on both vertical edges."""
    return BoundarySpec(
        bottom=lambda x, t: np.full_like(np.asarray(x, dtype=float), value),
        top=lambda x, t: np.full_like(np.asarray(x, dtype=float), value),
        right=lambda y, t: np.full_like(np.asarray(y, dtype=float), flux),
        left=lambda y, t: np.full_like(np.asarray(y, dtype=float), flux),
    )


# ---------------------------------------------------------------------------
# full problem


@dataclass(frozen=True)
class ProblemSpec:
    """Everything but the drift estimate: reaction rate, source, initial and boundary data.

    source is a vectorized callable (x, y, t); u0 is a vectorized callable
    (x, y).  The true drift is carried alongside for data generation and
    error reporting, and is ignored by solvers that take an explicit drift.
    """

    cp: float
    source: Callable
    u0: Callable
    boundary: BoundarySpec
    time: TimeGrid
    drift: DriftSpec | None = None

    def source_field(self, grid: Grid2D, t: float) -> ScalarField:
        return field_from_function(grid, lambda x, y: self.source(x, y, t))

    def u0_field(self, grid: Grid2D) -> ScalarField:
        """Initial data with boundary nodes corrected to match the t = 0 boundary data."""
        return correct_initial_data(field_from_function(grid, self.u0), self.boundary)


def correct_initial_data(u0: ScalarField, bc: BoundarySpec) -> ScalarField:
    """Overwrite boundary nodes so the discrete boundary conditions hold at t = 0.

    Dirichlet rows take the boundary values directly.  On the vertical edges
    the boundary node is solved from the one-sided three-node derivative so
    the discrete Neumann condition holds exactly; the map is idempotent.
    """
    g = u0.grid
    v = u0.values2d.copy()
    x = g.x
    yi = g.y[1:-1]
    v[0, :] = bc.bottom(x, 0.0)
    v[-1, :] = bc.top(x, 0.0)
    # left edge: (-3 v0 + 4 v1 - v2) / (2 hx) = -left_datum  (outward normal -x)
    v[1:-1, 0] = (4.0 * v[1:-1, 1] - v[1:-1, 2] + 2.0 * g.hx * np.asarray(bc.left(yi, 0.0))) / 3.0
    # right edge: (3 v_end - 4 v_end-1 + v_end-2) / (2 hx) = right_datum
    v[1:-1, -1] = (4.0 * v[1:-1, -2] - v[1:-1, -3] + 2.0 * g.hx * np.asarray(bc.right(yi, 0.0))) / 3.0
    return ScalarField(g, v)


def benchmark_problem(
    drift: DriftSpec | None = None,
    *,
    cp: float = 5.0,
    beta: float = 1.0,
    time: TimeGrid = TimeGrid(1.0, 100),
    source_amplitude: float = 5.0,
) -> ProblemSpec:
    """The standard recovery benchmark: f = 5 sin(pi x) sin(pi y), u0 = exp(x),
    exponential boundary family, cp = 5 on [0, 1]."""
    return ProblemSpec(
        cp=cp,
        source=lambda x, y, t: source_amplitude * np.sin(np.pi * x) * np.sin(np.pi * y),
        u0=lambda x, y: np.exp(x) + 0.0 * y,
        boundary=exponential_boundary(beta),
        time=time,
        drift=drift if drift is not None else SmoothDrift(),
    )


def constant_problem(c: float, cp: float = 5.0, time: TimeGrid = TimeGrid(1.0, 100)) -> ProblemSpec:
    """Steady problem whose exact solution is the constant c: f = cp*c, matching data."""
    return ProblemSpec(
        cp=cp,
        source=lambda x, y, t: np.full_like(np.asarray(x, dtype=float), cp * c),
        u0=lambda x, y: np.full_like(np.asarray(x, dtype=float), c),
        boundary=constant_boundary(c, 0.0),
        time=time,
        drift=SmoothDrift(),
    )
