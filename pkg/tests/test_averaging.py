import numpy as np
import pytest

from src.asymptotics.averaging import (
    alpha_average,
    alpha_weight,
    average_with_weights,
    b_tilde_identity,
    b_tilde_ratio,
    kronecker_ratio,
    kronecker_series,
    plain_average,
    polyak_average,
    toeplitz_average,
)
from src.asymptotics.normalization import asymptotic_decomposition
from src.core.errors import ValidationError
from src.core.grid import SamplePath, TimeGrid
from src.engine.simulator import simulate
from src.models.registry import build_model
from src.models.spec import ModelId, ModelName


def test_constant_path_averages_to_itself(continuous_grid):
    z = SamplePath(grid=continuous_grid, values=np.full(continuous_grid.n_steps + 1, 2.5))
    np.testing.assert_allclose(plain_average(z).zbar.values, 2.5, rtol=1e-12)


def test_plain_average_of_the_clock():
    grid = TimeGrid.continuous(10.0, 0.1)
    z = SamplePath(grid=grid, values=grid.times)
    T, dt = 10.0, 0.1
    assert plain_average(z).zbar.final == pytest.approx(T * (T - dt) / (2.0 * (1.0 + T)), rel=1e-9)


def test_log_space_average_matches_direct_weights(continuous_grid):
    z = SamplePath(grid=continuous_grid, values=np.sin(continuous_grid.times))
    g = 1.0 / (1.0 + continuous_grid.K_left)
    logged = polyak_average(z, g, continuous_grid)
    direct = average_with_weights(z, logged.eps)
    np.testing.assert_allclose(logged.zbar.values, direct.zbar.values, rtol=1e-10, atol=1e-12)


def test_weights_sum_to_one(continuous_grid):
    z = SamplePath(grid=continuous_grid, values=np.cos(continuous_grid.times))
    result = plain_average(z)
    w = result.weights(continuous_grid.n_steps)
    assert w.sum() == pytest.approx(1.0, rel=1e-12)
    rebuilt = w[0] * z.values[0] + np.dot(w[1:], z.values[:-1])
    assert rebuilt == pytest.approx(result.zbar.final, rel=1e-10)


def test_weight_path_must_be_nondecreasing(continuous_grid):
    z = SamplePath(grid=continuous_grid, values=np.zeros(continuous_grid.n_steps + 1))
    eps = 1.0 + continuous_grid.K
    eps[5] = 0.0
    with pytest.raises(ValidationError):
        average_with_weights(z, eps)


def test_zero_alpha_gives_unit_weight(linear_model, continuous_grid, seed):
    decomposition = asymptotic_decomposition(simulate(linear_model, continuous_grid, seed))
    np.testing.assert_array_equal(alpha_weight(decomposition, 0.0).values, 1.0)
    with pytest.raises(ValidationError):
        alpha_weight(decomposition, -1.0)


def test_alpha_weight_tracks_the_clock_for_standard_gain(linear_model, continuous_grid, seed):
    decomposition = asymptotic_decomposition(simulate(linear_model, continuous_grid, seed))
    eps = alpha_weight(decomposition, 1.0)
    assert eps.final / (1.0 + continuous_grid.horizon) == pytest.approx(1.0, rel=0.02)


def test_alpha_average_is_a_weighted_average(linear_model, continuous_grid, seed):
    run = simulate(linear_model, continuous_grid, seed)
    result = alpha_average(run.z, asymptotic_decomposition(run))
    assert result.alpha == 1.0
    assert np.min(run.z.values) <= result.zbar.final <= np.max(run.z.values)


def test_b_tilde_double_integral_identity(linear_model, continuous_grid, seed):
    decomposition = asymptotic_decomposition(simulate(linear_model, continuous_grid, seed))
    identity = b_tilde_identity(decomposition, alpha_weight(decomposition, 1.0))
    assert identity.relative_gap < 1e-6
    assert identity.B[0] == 0.0
    assert np.all(identity.B_tilde >= -1e-9)


def test_b_tilde_ratio_grows():
    grid = TimeGrid.continuous(1000.0, 0.1)
    model = build_model(ModelId.of(ModelName.LINEAR_STANDARD), grid)
    decomposition = asymptotic_decomposition(simulate(model, grid, seed=4))
    eps = alpha_weight(decomposition, 1.0)
    ratio = b_tilde_ratio(b_tilde_identity(decomposition, eps), eps)
    assert ratio[-1] > 10.0 * ratio[grid.index_at(10.0)]


def test_toeplitz_average_of_convergent_sequence():
    n = np.arange(1, 10001, dtype=float)
    out = toeplitz_average(3.0 + 1.0 / n, np.ones_like(n))
    assert out[-1] == pytest.approx(3.0, abs=1e-2)
    np.testing.assert_array_equal(toeplitz_average([1.0, 2.0], [0.0, 0.0]), [0.0, 0.0])


def test_kronecker_ratio_vanishes_when_series_converges():
    n = 2000
    increments = (-1.0) ** np.arange(n)
    levels = np.arange(n + 1, dtype=float)
    assert abs(kronecker_ratio(increments, 1.0 + levels)[-1]) < 0.01
    assert abs(kronecker_series(increments, levels)[-1]) < 1.0
