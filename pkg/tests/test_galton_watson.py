import numpy as np
import pytest

from src.core.errors import ValidationError
from src.core.grid import TimeGrid
from src.core.rng import stream
from src.diagnostics.classify import finite_sum, infinite_sum
from src.diagnostics.report import Verdict
from src.engine.simulator import simulate, simulate_many
from src.engine.squares import Representation, decompose_z_squared
from src.models.galton_watson import (
    draw_observations,
    exhausted_step,
    gw_transition,
    mle_path,
    recursive_estimates,
)
from src.models.registry import build_model
from src.models.spec import ModelId, ModelName

N_OBSERVATIONS = 1000


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
def test_recursion_equals_mle_from_any_start(theta):
    for seed in range(100):
        x = draw_observations(theta, N_OBSERVATIONS, stream(seed))
        mle = mle_path(x)
        for theta0 in (-5.0, 0.0, 7.0):
            estimates = recursive_estimates(x, theta0)[1:]
            np.testing.assert_allclose(estimates, mle, rtol=1e-10, atol=1e-12)


def test_population_never_dies_out():
    x = draw_observations(0.3, 200, stream(7))
    assert x[0] == 1.0
    assert np.all(x >= 1.0)


def test_supercritical_population_reaches_large_means():
    x = draw_observations(2.0, N_OBSERVATIONS, stream(11))
    assert np.all(np.isfinite(x))
    assert x[-1] > 1e250


def test_transition_requires_positive_theta():
    with pytest.raises(ValidationError):
        gw_transition(0.0, 3, stream(1))


def test_simulated_run_is_the_mle_error():
    grid = TimeGrid.discrete(300)
    theta, theta0 = 0.8, 7.0
    model = build_model(ModelId.of(ModelName.GALTON_WATSON, theta=theta, theta0=theta0), grid)
    run = simulate(model, grid, seed=5)
    x = run.model.observations
    assert x.ndim == 1
    np.testing.assert_allclose(run.z.values[1:] + theta, mle_path(x), rtol=1e-10, atol=1e-12)
    assert run.z.values[0] == theta0 - theta


def test_galton_watson_needs_discrete_grid():
    with pytest.raises(ValidationError):
        build_model(ModelId.of(ModelName.GALTON_WATSON, theta=1.0), TimeGrid.continuous(10.0, 0.1))


def test_galton_watson_requires_theta():
    with pytest.raises(ValidationError):
        build_model(ModelId.of(ModelName.GALTON_WATSON), TimeGrid.discrete(10))


def test_supercritical_path_stops_before_overflow():
    x = draw_observations(2.0, 1200, stream(1))
    [stop] = exhausted_step(x)
    assert 900 < stop < 1100
    assert np.all(np.isfinite(x[:stop]))
    assert np.isfinite(np.sum(x[:stop]))
    assert np.all(np.isnan(x[stop:]))

    mle = mle_path(x)
    assert np.all(np.isfinite(mle[:stop - 1]))
    assert np.all(np.isnan(mle[stop - 1:]))
    np.testing.assert_allclose(recursive_estimates(x, 0.0)[1:stop], mle[:stop - 1], rtol=1e-10)


def test_saturated_run_is_marked_divergent():
    grid = TimeGrid.discrete(1200)
    model = build_model(ModelId.of(ModelName.GALTON_WATSON, theta=2.0), grid)
    run = simulate(model, grid, seed=1)
    x = run.model.observations
    stop = int(exhausted_step(x)[0])

    assert run.divergence == stop
    assert np.all(np.isfinite(run.z.values[:stop]))
    assert np.all(np.isnan(run.z.values[stop:]))
    np.testing.assert_allclose(run.z.values[1:stop] + 2.0, mle_path(x)[:stop - 1], rtol=1e-10, atol=1e-12)


def test_complete_paths_have_no_stop():
    x = draw_observations(0.5, 500, stream(3))
    assert exhausted_step(x).tolist() == [-1]


def test_supercritical_square_split_reads_growth_from_coefficients():
    grid = TimeGrid.discrete(600)
    model = build_model(ModelId.of(ModelName.GALTON_WATSON, theta=2.0), grid)
    run = simulate(model, grid, 1)
    assert not run.diverged
    standard = decompose_z_squared(run, Representation.STANDARD)
    nonstandard = decompose_z_squared(run, Representation.NONSTANDARD)

    # z shrinks geometrically, so the path-evaluated A1 stops moving
    A1 = standard.A1.values
    assert A1[-1] == pytest.approx(A1[100], rel=1e-9)

    assert infinite_sum(standard.A1_bound.values, grid).verdict == Verdict.HOLDS
    assert standard.A1_bound.values[-1] > 5.0 * standard.A1_bound.values[60]
    assert finite_sum(nonstandard.A1_bound.values, grid).verdict == Verdict.HOLDS


@pytest.mark.slow
def test_subcritical_estimator_settles_near_theta():
    grid = TimeGrid.discrete(10_000)
    model = build_model(ModelId.of(ModelName.GALTON_WATSON, theta=0.5), grid)
    runs = simulate_many(model, grid, 8, 200)
    close = [abs(run.z.final) < 0.1 for run in runs]
    assert np.mean(close) >= 0.95
