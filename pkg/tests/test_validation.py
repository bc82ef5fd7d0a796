"""Error metrics, convergence bookkeeping, and solution diagnostics."""

import numpy as np
import pytest

from drift_recover.forward import solve_forward
from drift_recover.grid import Grid2D, ScalarField, TimeGrid, field_from_function
from drift_recover.scenario import SmoothDrift, benchmark_problem, evaluate_drift
from drift_recover.validation import (
    ConvergenceStudy,
    manufactured_problem,
    manufactured_solution,
    mms_spatial_study,
    mms_temporal_study,
    positivity_diagnostics,
    rel_err,
)


def test_rel_err_zero_for_identical_fields():
    grid = Grid2D(15, 15)
    q = field_from_function(grid, lambda x, y: 1 + x * y)
    assert rel_err(q, q) == 0.0


def test_rel_err_hand_value():
    grid = Grid2D(10, 10)
    est = ScalarField(grid, np.full(grid.n_nodes, 1.5))
    true = ScalarField(grid, np.full(grid.n_nodes, 1.0))
    assert rel_err(est, true) == pytest.approx(0.5)


def test_rel_err_rejects_zero_reference():
    grid = Grid2D(10, 10)
    z = ScalarField(grid, np.zeros(grid.n_nodes))
    with pytest.raises(ValueError):
        rel_err(z, z)


def test_manufactured_source_closes_the_equation():
    # f = (beta - 1 + q + cp) e^{beta t + x} makes u = e^{beta t + x} exact
    drift = SmoothDrift()
    beta, cp = 1.0, 5.0
    spec = manufactured_problem(drift, cp=cp, beta=beta)
    grid = Grid2D(13, 13)
    t = 0.37
    f = spec.source_field(grid, t)
    q = evaluate_drift(drift, grid)
    X = np.tile(grid.x, grid.ny)
    expected = (beta - 1.0 + q.values + cp) * np.exp(beta * t + X)
    np.testing.assert_allclose(f.values, expected, rtol=1e-13)


def test_manufactured_solution_matches_solver():
    spec = manufactured_problem(SmoothDrift(), time=TimeGrid(0.1, 400))
    grid = Grid2D(41, 41)
    sol = solve_forward(spec, evaluate_drift(SmoothDrift(), grid))
    exact = manufactured_solution()
    u_ref = field_from_function(grid, lambda x, y: exact(x, y, spec.time.T))
    err = np.max(np.abs(sol.u_T.values - u_ref.values))
    assert err < 5e-3


def test_observed_orders_from_halving():
    study = ConvergenceStudy(
        parameter="h",
        values=[0.1, 0.05, 0.025],
        errors_l2=[1.0, 0.25, 0.0625],
        errors_linf=[2.0, 1.0, 0.5],
    )
    np.testing.assert_allclose(study.observed_orders, [2.0, 2.0])
    np.testing.assert_allclose(study.observed_orders_linf, [1.0, 1.0])
    assert study.fitted_order == pytest.approx(2.0)


def test_spatial_study_second_order_small():
    study = mms_spatial_study(resolutions=(11, 21), nt=400)
    assert len(study.errors_l2) == 2
    assert 1.5 <= study.observed_orders[0] <= 2.5


def test_temporal_study_first_order_small():
    study = mms_temporal_study(step_counts=(10, 20), n=41)
    assert len(study.errors_l2) == 2
    assert 0.7 <= study.observed_orders[0] <= 1.3


def test_benchmark_solution_slopes():
    # terminal data from the standard run: increasing in x, nondecreasing in t
    drift = SmoothDrift()
    spec = benchmark_problem(drift)
    grid = Grid2D(40, 40)
    sol = solve_forward(spec, evaluate_drift(drift, grid))
    report = positivity_diagnostics(sol)
    assert report.dx_positive
    assert report.dt_nonnegative
    assert report.min_dx_uT > 0.0
    assert report.min_dt_uT >= 0.0
