import numpy as np
import pytest

from src.core.calculus import (
    dolean_exponential,
    inverse_exponential,
    log_weight_process,
    step_integral,
    stochastic_integral,
)
from src.core.errors import GridMismatchError, ValidationError, ZeroFactorError
from src.core.grid import SamplePath, TimeGrid, find_divergence
from src.core.rng import stream, validate_seed


def test_continuous_grid_clock():
    grid = TimeGrid.continuous(10.0, 0.5)
    assert grid.n_steps == 20
    assert grid.horizon == 10.0
    np.testing.assert_allclose(grid.K, grid.times)
    assert not grid.has_jumps
    assert not grid.is_discrete


def test_discrete_grid_is_all_jumps():
    grid = TimeGrid.discrete(7)
    assert grid.is_discrete
    assert grid.K[-1] == 7.0
    assert grid.jump_flag.all()


def test_grid_rejects_bad_input():
    with pytest.raises(ValidationError):
        TimeGrid.continuous(-1.0, 0.1)
    with pytest.raises(ValidationError):
        TimeGrid.discrete(0)
    with pytest.raises(ValidationError):
        TimeGrid(times=[0.0, 1.0], dK=[-1.0], jump_flag=[False])
    with pytest.raises(GridMismatchError):
        TimeGrid(times=[0.0, 1.0, 2.0], dK=[1.0], jump_flag=[False])


def test_decade_bounds_on_time_axis():
    grid = TimeGrid.discrete(1000)
    assert grid.decade_bounds() == (10, 100, 1000)


def test_step_integral_prepends_zero():
    out = step_integral([1.0, 2.0, 3.0], [1.0, 1.0, 2.0])
    np.testing.assert_array_equal(out, [0.0, 1.0, 3.0, 9.0])


def test_stochastic_integral_uses_left_values():
    grid = TimeGrid.discrete(3)
    path = SamplePath(grid=grid, values=[1.0, 2.0, 3.0, 4.0])
    out = stochastic_integral(path, [1.0, 1.0, 1.0])
    np.testing.assert_array_equal(out.values, [0.0, 1.0, 3.0, 6.0])


def test_dolean_integral_equation_on_jump_grid():
    grid = TimeGrid.discrete(200)
    r = 0.3 / (1.0 + grid.K_left)
    eps = dolean_exponential(r, grid).values
    rebuilt = 1.0 - step_integral(eps[:-1] * r, grid.dK)
    np.testing.assert_allclose(eps, rebuilt, rtol=0, atol=1e-12)


def test_dolean_integral_equation_continuous_limit():
    grid = TimeGrid.continuous(5.0, 1e-4)
    r = np.full(grid.n_steps, 0.7)
    eps = dolean_exponential(r, grid).values
    np.testing.assert_allclose(eps[-1], np.exp(-3.5), rtol=1e-9)
    rebuilt = 1.0 - step_integral(eps[:-1] * r, grid.dK)
    assert np.max(np.abs(eps - rebuilt)) < 1e-3


def test_exponential_times_inverse_is_one():
    grid = TimeGrid.from_clock(np.arange(6.0), [0.0, 0.5, 1.0, 2.0, 2.5, 4.0],
                               jump_flag=[False, True, False, True, False])
    r = np.array([0.4, 0.9, 1.5, 0.2, 0.3])
    product = dolean_exponential(r, grid).values * inverse_exponential(r, grid).values
    np.testing.assert_allclose(product, 1.0, rtol=0, atol=1e-12)


def test_inverse_exponential_zero_factor_reports_step():
    grid = TimeGrid.discrete(4)
    r = np.array([0.5, 1.0, 0.5, 0.5])
    with pytest.raises(ZeroFactorError) as info:
        inverse_exponential(r, grid)
    assert info.value.step == 2


def test_log_weight_process_matches_product():
    grid = TimeGrid.discrete(50)
    g = 1.0 / (1.0 + grid.K_left)
    direct = np.concatenate(([1.0], np.cumprod(1.0 + g * grid.dK)))
    np.testing.assert_allclose(np.exp(log_weight_process(g, grid)), direct, rtol=1e-12)
    # ε(+g∘K) with g = 1/(1+K_-) on unit jumps is exactly 1 + K
    np.testing.assert_allclose(direct, 1.0 + grid.K, rtol=1e-12)


def test_guarded_path_marks_first_escape():
    grid = TimeGrid.discrete(4)
    path = SamplePath.guarded(grid, [0.0, 1.0, 1e20, np.inf, np.nan], guard=1e12)
    assert path.divergence == 2
    assert find_divergence(np.array([1.0, 2.0])) is None


def test_path_rejects_unmarked_nan():
    grid = TimeGrid.discrete(2)
    with pytest.raises(ValidationError):
        SamplePath(grid=grid, values=[0.0, np.nan, 1.0])


def test_seed_validation():
    assert validate_seed(0) == 0
    assert validate_seed(2 ** 64 - 1) == 2 ** 64 - 1
    for bad in (-1, 2 ** 64, 1.5, True):
        with pytest.raises(ValidationError):
            validate_seed(bad)


def test_streams_are_addressable_and_distinct():
    a = stream(42, 3).standard_normal(5)
    b = stream(42, 3).standard_normal(5)
    c = stream(42, 4).standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
