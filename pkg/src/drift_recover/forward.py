"""Implicit time stepping for the convection-diffusion-reaction equation.

Each backward Euler step solves

    (1/tau) u_new - lap(u_new) + q du_new/dx + cp u_new = u_old/tau + f(t_new)

on the grid of the supplied drift field.  Dirichlet rows (y = 0, 1) are
replaced by identity rows carrying the boundary values; Neumann rows
(x = 0, 1, excluding corners) are replaced by second-order one-sided
derivative stencils matching the outward-normal data.  The system matrix
does not depend on time, so it is factorized exactly once per solve and
the factorization is reused for every step.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import Grid2D, ScalarField
from .scenario import ProblemSpec

_counters = {"factorizations": 0}


def factorization_count() -> int:
    """Total matrix factorizations performed in this process (test instrumentation)."""
    return _counters["factorizations"]


class SolverFailure(RuntimeError):
    """Factorization failed or the time stepping produced non-finite values."""


@dataclass
class SolverStats:
    n_unknowns: int
    steps: int
    factorize_seconds: float
    solve_seconds: float


@dataclass
class SystemMatrix:
    """Factorized backward Euler operator for one grid, drift, step size and reaction rate."""

    grid: Grid2D
    tau: float
    cp: float
    matrix: sp.csc_matrix
    lu: spla.SuperLU
    factorize_seconds: float


@dataclass
class ForwardSolution:
    """Terminal state, its backward-difference time derivative, and optional full trajectory."""

    grid: Grid2D
    u_T: ScalarField
    du_dt_T: ScalarField
    stats: SolverStats
    trajectory: list[ScalarField] | None = None


def _node_masks(g: Grid2D):
    I, J = np.meshgrid(np.arange(g.nx), np.arange(g.ny))
    dirichlet = (J == 0) | (J == g.ny - 1)
    left = (I == 0) & ~dirichlet
    right = (I == g.nx - 1) & ~dirichlet
    interior = ~(dirichlet | left | right)
    return I.ravel(), J.ravel(), dirichlet.ravel(), left.ravel(), right.ravel(), interior.ravel()


def assemble(grid: Grid2D, q: ScalarField, tau: float, cp: float) -> SystemMatrix:
    """Build and factorize the backward Euler system matrix.

    Parameters
    ----------
    grid : target grid (must match the drift field's grid)
    q : drift coefficient as nodal values
    tau : time step size
    cp : reaction rate
    """
    if q.grid != grid:
        raise ValueError("drift field lives on a different grid")
    if tau <= 0:
        raise ValueError(f"time step must be positive, got {tau}")
    n = grid.n_nodes
    nx = grid.nx
    hx, hy = grid.hx, grid.hy
    I, J, dirichlet, left, right, interior = _node_masks(grid)
    k = np.arange(n)
    qv = q.values

    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(np.asarray(r))
        cols.append(np.asarray(c))
        vals.append(np.broadcast_to(v, np.asarray(r).shape).astype(float))

    ki = k[interior]
    # the same reciprocal must appear in the rhs (see solve_forward) so that
    # exact steady states stay put to roundoff
    diag = 1.0 / tau + cp + 2.0 / hx ** 2 + 2.0 / hy ** 2
    add(ki, ki, diag)
    add(ki, ki - 1, -1.0 / hx ** 2 - qv[interior] / (2.0 * hx))
    add(ki, ki + 1, -1.0 / hx ** 2 + qv[interior] / (2.0 * hx))
    add(ki, ki - nx, -1.0 / hy ** 2)
    add(ki, ki + nx, -1.0 / hy ** 2)

    kd = k[dirichlet]
    add(kd, kd, 1.0)

    # one-sided derivative rows on the vertical edges
    kl = k[left]
    add(kl, kl, -3.0 / (2.0 * hx))
    add(kl, kl + 1, 4.0 / (2.0 * hx))
    add(kl, kl + 2, -1.0 / (2.0 * hx))

    kr = k[right]
    add(kr, kr, 3.0 / (2.0 * hx))
    add(kr, kr - 1, -4.0 / (2.0 * hx))
    add(kr, kr - 2, 1.0 / (2.0 * hx))

    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsc()
    t0 = _time.perf_counter()
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise SolverFailure(f"factorization failed: {exc}") from exc
    elapsed = _time.perf_counter() - t0
    _counters["factorizations"] += 1
    return SystemMatrix(grid=grid, tau=tau, cp=cp, matrix=A, lu=lu, factorize_seconds=elapsed)


def solve_forward(
    spec: ProblemSpec,
    q: ScalarField,
    *,
    system: SystemMatrix | None = None,
    keep_trajectory: bool = False,
) -> ForwardSolution:
    """March the problem from t = 0 to t = T with the given drift.

    The drift field fixes the grid.  A prebuilt SystemMatrix for the same
    grid/tau/cp may be passed to skip assembly; otherwise the matrix is
    assembled and factorized once here.
    """
    grid = q.grid
    tg = spec.time
    tau = tg.tau
    if system is None:
        system = assemble(grid, q, tau, spec.cp)
    elif system.grid != grid:
        raise ValueError("prebuilt system matrix lives on a different grid")

    x = grid.x
    yi = grid.y[1:-1]
    v2 = lambda f: f.reshape(grid.ny, grid.nx)

    u = spec.u0_field(grid).values.copy()
    trajectory = [ScalarField(grid, u.copy())] if keep_trajectory else None
    u_prev = None
    solve_seconds = 0.0
    inv_tau = 1.0 / tau
    for step, t_new in enumerate(tg.times()[1:], start=1):
        rhs = u * inv_tau + spec.source_field(grid, t_new).values
        r2 = v2(rhs)
        bottom = np.asarray(spec.boundary.bottom(x, t_new), dtype=float)
        top = np.asarray(spec.boundary.top(x, t_new), dtype=float)
        r2[0, :] = bottom
        r2[-1, :] = top
        r2[1:-1, 0] = -np.asarray(spec.boundary.left(yi, t_new), dtype=float)
        r2[1:-1, -1] = np.asarray(spec.boundary.right(yi, t_new), dtype=float)
        t0 = _time.perf_counter()
        # solve for the increment: keeps states that already satisfy the
        # system (e.g. exact steady states) fixed to roundoff
        u_new = u + system.lu.solve(rhs - system.matrix @ u)
        solve_seconds += _time.perf_counter() - t0
        if not np.all(np.isfinite(u_new)):
            raise SolverFailure(f"non-finite state at step {step} (t = {t_new:g})")
        un2 = v2(u_new)
        un2[0, :] = bottom  # keep Dirichlet values exact, not just up to solver roundoff
        un2[-1, :] = top
        u_prev = u
        u = u_new
        if keep_trajectory:
            trajectory.append(ScalarField(grid, u.copy()))

    du_dt = (u - u_prev) / tau
    stats = SolverStats(
        n_unknowns=grid.n_nodes,
        steps=tg.nt,
        factorize_seconds=system.factorize_seconds,
        solve_seconds=solve_seconds,
    )
    return ForwardSolution(
        grid=grid,
        u_T=ScalarField(grid, u),
        du_dt_T=ScalarField(grid, du_dt),
        stats=stats,
        trajectory=trajectory,
    )


def terminal_derivative(solution: ForwardSolution) -> ScalarField:
    """Backward-difference du/dt at the final time."""
    if solution.du_dt_T is None:
        raise RuntimeError("solution does not carry the terminal time derivative")
    return solution.du_dt_T
