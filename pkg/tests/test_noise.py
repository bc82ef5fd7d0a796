"""Noise injection and screened-diffusion denoising."""

import numpy as np
import pytest

from drift_recover.grid import (
    Grid2D,
    ScalarField,
    apply_laplacian,
    field_from_function,
    norm_l2,
    norm_linf,
    restrict,
)
from drift_recover.noise import (
    AUTO_STRENGTH_SCALE,
    DenoiseConfig,
    NoiseConfig,
    add_noise,
    auto_strength,
    denoise,
)
from drift_recover.forward import solve_forward
from drift_recover.scenario import SmoothDrift, benchmark_problem, evaluate_drift


def _sample_field(n=24):
    return field_from_function(Grid2D(n, n), lambda x, y: np.exp(x) * (1 + 0.3 * y))


def test_zero_delta_is_identity():
    g = _sample_field()
    noisy, noise = add_noise(g, NoiseConfig(delta=0.0, seed=1))
    np.testing.assert_array_equal(noisy.values, g.values)
    assert norm_linf(noise) == 0.0


def test_noise_hard_bound_one_percent():
    g = _sample_field()
    noisy, _ = add_noise(g, NoiseConfig(delta=2e-2, seed=7))
    assert np.max(np.abs(noisy.values - g.values)) <= 1e-2 * norm_linf(g)


def test_noise_statistics_three_percent():
    # ~1e5 iid perturbations; mean within 3 sigma of zero, max under the bound
    g = field_from_function(Grid2D(317, 317), lambda x, y: 1.0 + 0.0 * x)
    noisy, noise = add_noise(g, NoiseConfig(delta=6e-2, seed=11))
    n = noise.values.size
    sigma_mean = (6e-2 / np.sqrt(12.0)) / np.sqrt(n)
    assert abs(noise.values.mean()) <= 3.0 * sigma_mean
    assert np.max(np.abs(noise.values)) <= 3e-2 * norm_linf(g)


def test_noise_seed_reproducible_and_seeds_differ():
    g = _sample_field()
    a, _ = add_noise(g, NoiseConfig(delta=1e-2, seed=5))
    b, _ = add_noise(g, NoiseConfig(delta=1e-2, seed=5))
    c, _ = add_noise(g, NoiseConfig(delta=1e-2, seed=6))
    np.testing.assert_array_equal(a.values, b.values)
    assert np.any(a.values != c.values)


def test_negative_delta_rejected():
    with pytest.raises(ValueError):
        NoiseConfig(delta=-1e-3, seed=0)


def test_denoise_disabled_returns_copy():
    g = _sample_field()
    out = denoise(g, DenoiseConfig(enabled=False))
    np.testing.assert_array_equal(out.values, g.values)
    assert out is not g


def test_denoise_zero_strength_is_identity():
    g = _sample_field()
    out = denoise(g, DenoiseConfig(enabled=True, strength=0.0))
    np.testing.assert_array_equal(out.values, g.values)


def test_denoise_preserves_constants():
    g = ScalarField(Grid2D(20, 20), np.full(400, 2.75))
    for lam in (1e-4, 1e-2, 1.0):
        out = denoise(g, DenoiseConfig(enabled=True, strength=lam))
        np.testing.assert_allclose(out.values, 2.75, atol=1e-12)


def test_denoise_never_amplifies():
    rng = np.random.default_rng(2)
    g = ScalarField(Grid2D(25, 25), rng.uniform(-3.0, 3.0, 625))
    for lam in (1e-3, 1e-1):
        out = denoise(g, DenoiseConfig(enabled=True, strength=lam))
        assert norm_linf(out) <= norm_linf(g) + 1e-10


def test_denoise_linear_in_input():
    rng = np.random.default_rng(3)
    grid = Grid2D(18, 18)
    g1 = ScalarField(grid, rng.standard_normal(grid.n_nodes))
    g2 = ScalarField(grid, rng.standard_normal(grid.n_nodes))
    cfg = DenoiseConfig(enabled=True, strength=5e-3)
    combo = denoise(ScalarField(grid, 2.0 * g1.values - 3.0 * g2.values), cfg)
    parts = 2.0 * denoise(g1, cfg).values - 3.0 * denoise(g2, cfg).values
    np.testing.assert_allclose(combo.values, parts, atol=1e-10)


def test_denoise_repins_horizontal_edges():
    rng = np.random.default_rng(4)
    grid = Grid2D(16, 16)
    g = ScalarField(grid, rng.standard_normal(grid.n_nodes))
    out = denoise(g, DenoiseConfig(enabled=True, strength=1e-2))
    np.testing.assert_array_equal(out.values2d[0, :], g.values2d[0, :])
    np.testing.assert_array_equal(out.values2d[-1, :], g.values2d[-1, :])


def test_auto_strength_formula():
    g = _sample_field()
    delta = 2e-3
    assert auto_strength(g, delta) == pytest.approx(
        AUTO_STRENGTH_SCALE * (delta * norm_linf(g)) ** 2
    )
    assert auto_strength(g, 0.0) == 0.0


def test_auto_strength_requires_noise_level():
    g = _sample_field()
    with pytest.raises(ValueError):
        denoise(g, DenoiseConfig(enabled=True))


def test_anchored_denoise_honors_boundary_data():
    spec = benchmark_problem(SmoothDrift())
    grid = Grid2D(30, 30)
    sol = solve_forward(spec, evaluate_drift(SmoothDrift(), grid))
    noisy, _ = add_noise(sol.u_T, NoiseConfig(delta=2e-2, seed=9))
    out = denoise(
        noisy,
        DenoiseConfig(enabled=True, strength=1e-3),
        boundary=spec.boundary,
        t=spec.time.T,
    )
    T = spec.time.T
    np.testing.assert_allclose(out.values2d[0, :], spec.boundary.bottom(grid.x, T), atol=1e-10)
    np.testing.assert_allclose(out.values2d[-1, :], spec.boundary.top(grid.x, T), atol=1e-10)
    v = out.values2d
    inv2h = 1.0 / (2.0 * grid.hx)
    slope_left = (-3.0 * v[1:-1, 0] + 4.0 * v[1:-1, 1] - v[1:-1, 2]) * inv2h
    slope_right = (3.0 * v[1:-1, -1] - 4.0 * v[1:-1, -2] + v[1:-1, -3]) * inv2h
    yi = grid.y[1:-1]
    np.testing.assert_allclose(slope_left, -spec.boundary.left(yi, T), atol=1e-8)
    np.testing.assert_allclose(slope_right, spec.boundary.right(yi, T), atol=1e-8)


def test_anchored_denoise_requires_time():
    g = _sample_field()
    spec = benchmark_problem(SmoothDrift())
    with pytest.raises(ValueError):
        denoise(g, DenoiseConfig(enabled=True, strength=1e-3), boundary=spec.boundary)


def test_smoothing_improves_laplacian_estimate():
    # 3% noise on the standard pipeline observation: the smoothed field's
    # Laplacian must sit closer to the clean one than the raw noisy field's
    spec = benchmark_problem(SmoothDrift())
    coarse, fine = Grid2D(60, 60), Grid2D(100, 100)
    sol = solve_forward(spec, evaluate_drift(SmoothDrift(), fine))
    g = restrict(sol.u_T, coarse)
    noisy, _ = add_noise(g, NoiseConfig(delta=6e-2, seed=13))
    smoothed = denoise(
        noisy,
        DenoiseConfig(enabled=True, noise_delta=6e-2),
        boundary=spec.boundary,
        t=spec.time.T,
    )
    lap_clean = apply_laplacian(g)
    err_raw = norm_l2(ScalarField(coarse, apply_laplacian(noisy).values - lap_clean.values))
    err_smooth = norm_l2(ScalarField(coarse, apply_laplacian(smoothed).values - lap_clean.values))
    assert err_smooth < err_raw
