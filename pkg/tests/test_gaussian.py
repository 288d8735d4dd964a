import math

import numpy as np
import pytest

from pathsig.gaussian import (GaussianModel, covariance, covariance_matrix,
                              sample_path, trial_model, trial_seed)


def test_model_validation():
    with pytest.raises(ValueError):
        GaussianModel("fbm", hurst=None)
    with pytest.raises(ValueError):
        GaussianModel("fbm", hurst=0.2)
    with pytest.raises(ValueError):
        GaussianModel("fbm", hurst=1.0)
    with pytest.raises(ValueError):
        GaussianModel("weird")
    with pytest.raises(ValueError):
        GaussianModel("ou", n_points=1)


def test_fbm_covariance_closed_form():
    m = GaussianModel("fbm", hurst=0.75)
    assert covariance(m, 1.0, 1.0) == pytest.approx(1.0)
    s, t = 0.3, 0.8
    h2 = 1.5
    assert covariance(m, s, t) == pytest.approx(
        0.5 * (s**h2 + t**h2 - (t - s) ** h2))
    with pytest.raises(ValueError):
        covariance(m, -0.1, 0.5)


def test_fbm_half_is_brownian():
    m = GaussianModel("fbm", hurst=0.5)
    for s, t in [(0.2, 0.9), (0.5, 0.5), (0.7, 0.1)]:
        assert covariance(m, s, t) == pytest.approx(min(s, t))


def test_ou_variance_at_one():
    m = GaussianModel("ou")
    assert covariance(m, 1.0, 1.0) == pytest.approx((1 - math.exp(-2)) / 2)
    assert covariance(m, 1.0, 1.0) == pytest.approx(0.432332, abs=1e-6)


def test_ou_covariance_matches_defining_integral():
    # Monte Carlo over the driving integral int_0^t e^{-(t-s)} dB_s
    rng = np.random.default_rng(7)
    steps, trials = 400, 20000
    grid = np.linspace(0.0, 1.0, steps + 1)
    db = rng.standard_normal((trials, steps)) * math.sqrt(1.0 / steps)
    m = GaussianModel("ou")
    for t_idx in (steps // 2, steps):
        t = grid[t_idx]
        weights = np.exp(-(t - 0.5 * (grid[:t_idx] + grid[1:t_idx + 1])))
        x_t = db[:, :t_idx] @ weights
        var = float(np.var(x_t))
        se = math.sqrt(2.0 / trials) * var  # MC standard error of a variance
        assert abs(var - covariance(m, t, t)) < 5 * se + 5e-3


def test_bridge_covariance():
    m = GaussianModel("bridge")
    assert covariance(m, 0.3, 0.8) == pytest.approx(0.3 - 0.24)
    assert covariance(m, 1.0, 1.0) == 0.0


def test_sample_starts_at_origin_and_determinism():
    for variant, hurst in [("fbm", 0.75), ("ou", None), ("bridge", None)]:
        m = GaussianModel(variant, hurst=hurst, n_points=65, seed=42)
        a = sample_path(m)
        b = sample_path(m)
        assert np.all(a.points[0] == 0.0)
        assert np.array_equal(a.points, b.points)  # bit identical
        c = sample_path(GaussianModel(variant, hurst=hurst, n_points=65, seed=43))
        assert not np.array_equal(a.points, c.points)


def test_bridge_pinned_at_both_ends():
    m = GaussianModel("bridge", n_points=33, seed=5)
    for trial in range(10):
        path = sample_path(trial_model(m, trial))
        assert np.all(path.points[0] == 0.0)
        assert np.all(path.points[-1] == 0.0)


def test_empirical_covariance_fbm(rng):
    # 4-point grid, many samples, every entry within 5 MC standard errors
    m = GaussianModel("fbm", dim=1, hurst=0.75, n_points=5, seed=99)
    trials = 4000
    samples = np.stack([sample_path(trial_model(m, k)).points[1:, 0]
                        for k in range(trials)])
    grid = np.linspace(0, 1, 5)[1:]
    ref = covariance_matrix(m, grid)
    prods = samples[:, :, None] * samples[:, None, :]
    emp = prods.mean(axis=0)
    se = prods.std(axis=0) / math.sqrt(trials)
    assert np.all(np.abs(emp - ref) <= 5 * se)


def test_coordinate_independence():
    m = GaussianModel("fbm", dim=2, hurst=0.5, n_points=9, seed=11)
    trials = 3000
    xs = np.stack([sample_path(trial_model(m, k)).points[-1] for k in range(trials)])
    cross = float(np.mean(xs[:, 0] * xs[:, 1]))
    se = float(np.std(xs[:, 0] * xs[:, 1])) / math.sqrt(trials)
    assert abs(cross) <= 5 * se


def test_trial_seed_documented_rule():
    assert trial_seed(5, 3) == int(
        np.random.SeedSequence([5, 3]).generate_state(1)[0])
    assert trial_seed(5, 3) != trial_seed(5, 4)
    assert trial_model(GaussianModel("ou", seed=5), 3).seed == trial_seed(5, 3)
