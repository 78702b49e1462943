import numpy as np
import pytest

from src.asymptotics.normalization import asymptotic_decomposition
from src.core.errors import EvaluatorError, ValidationError
from src.core.grid import TimeGrid
from src.engine.simulator import noiseless_run, simulate, simulate_many
from src.engine.squares import Representation, decompose_z_squared
from src.engine.stepper import EulerStepper, PathRecorder
from src.core.rng import streams
from src.models.registry import build_model, custom_model, schedule_model
from src.models.spec import ModelId, ModelName


def test_simulate_is_deterministic(linear_model, continuous_grid, seed):
    a = simulate(linear_model, continuous_grid, seed)
    b = simulate(linear_model, continuous_grid, seed)
    np.testing.assert_array_equal(a.z.values, b.z.values)
    np.testing.assert_array_equal(a.noise.dm, b.noise.dm)


def test_simulate_many_replays_single_streams(linear_model, continuous_grid, seed):
    runs = simulate_many(linear_model, continuous_grid, seed, replications=5)
    for k, run in enumerate(runs):
        single = simulate(linear_model, continuous_grid, seed, stream_index=k)
        np.testing.assert_array_equal(run.z.values, single.z.values)
        assert run.stream_index == k


def test_stored_noise_reproduces_recursion(slow_gain_model, continuous_grid, seed):
    run = simulate(slow_gain_model, continuous_grid, seed)
    assert run.recursion_residual() < 1e-12


def test_linear_model_contracts_without_noise(continuous_grid):
    model = build_model(ModelId.of(ModelName.LINEAR_STANDARD, z0=3.0, sigma=0.0), continuous_grid)
    run = simulate(model, continuous_grid, seed=1)
    assert abs(run.z.final) < 3.0 / (1.0 + continuous_grid.horizon) * 1.1
    np.testing.assert_allclose(run.noise.d_qc, continuous_grid.dK)


def test_noiseless_run_matches_euler(continuous_grid):
    beta = 0.5 / (1.0 + continuous_grid.K_left)
    gamma = 1.0 + continuous_grid.K
    model = schedule_model(continuous_grid, beta, gamma, z0=2.0)
    product = noiseless_run(model, continuous_grid)
    stepped = simulate(model, continuous_grid, seed=3)
    np.testing.assert_allclose(product.z.values, stepped.z.values, rtol=1e-12)


def test_noiseless_run_rejects_noisy_models(linear_model, continuous_grid):
    with pytest.raises(ValidationError):
        noiseless_run(linear_model, continuous_grid)


def test_divergence_is_marked_and_frozen():
    grid = TimeGrid.continuous(20.0, 0.01)
    model = build_model(ModelId.of(ModelName.CUSTOM, b=-5.0, sigma=1.0), grid)
    run = simulate(model, grid, seed=2)
    assert run.diverged
    assert np.isnan(run.z.values[run.divergence + 1:]).all()
    with pytest.raises(ValidationError):
        run.require_complete()


def test_non_finite_evaluator_raises():
    grid = TimeGrid.discrete(10)
    bad = custom_model(grid, drift_field=lambda i, u: np.where(np.asarray(i) >= 4, np.nan, -np.asarray(u)),
                       beta=lambda i: np.ones_like(np.asarray(i, dtype=float)))
    with pytest.raises(EvaluatorError) as info:
        simulate(bad, grid, seed=0)
    assert info.value.step == 4


def test_stepper_calls_observers_in_order(linear_model, continuous_grid):
    seen = []

    class Tracer:
        def start(self, model, n_reps):
            seen.append(("start", n_reps))

        def observe(self, i, u, z, dm, d_qc, active):
            seen.append(i)

    recorder = PathRecorder(3, continuous_grid, linear_model.z0)
    EulerStepper(linear_model, continuous_grid, streams(9, range(3))).run([recorder, Tracer()])
    assert seen[0] == ("start", 3)
    assert seen[1:] == list(range(1, continuous_grid.n_steps + 1))


@pytest.mark.parametrize("grid", [TimeGrid.continuous(20.0, 0.05), TimeGrid.discrete(400)])
def test_z_squared_representations(grid, seed):
    model = build_model(ModelId.of(ModelName.LINEAR_STANDARD, z0=1.0, alpha=2.0), grid)
    run = simulate(model, grid, seed)
    standard = decompose_z_squared(run, Representation.STANDARD)
    nonstandard = decompose_z_squared(run, Representation.NONSTANDARD)

    for d in (standard, nonstandard):
        assert np.all(np.diff(d.A1.values) >= 0.0)
        assert np.all(np.diff(d.A2.values) >= 0.0)
    np.testing.assert_allclose(standard.drift, nonstandard.drift, rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(standard.mart_residual.values, nonstandard.mart_residual.values,
                               rtol=1e-10, atol=1e-10)


def test_uphill_drift_keeps_representations_consistent(caplog):
    grid = TimeGrid.continuous(1.0, 0.01)
    model = custom_model(grid, drift_field=lambda i, u: np.asarray(u, dtype=float),
                         beta=lambda i: -np.ones_like(np.asarray(i, dtype=float)), z0=1.0, linear=True)
    run = noiseless_run(model, grid)
    standard = decompose_z_squared(run, Representation.STANDARD)
    with caplog.at_level("WARNING", logger="src.engine.squares"):
        nonstandard = decompose_z_squared(run, Representation.NONSTANDARD)

    assert "H(u)u > 0 on 100 continuous step(s)" in caplog.text
    assert np.all(np.diff(nonstandard.A1.values) >= 0.0)
    assert np.all(np.diff(nonstandard.A2.values) >= 0.0)
    np.testing.assert_allclose(standard.drift, nonstandard.drift, rtol=1e-12)


def test_noisy_path_matches_closed_form():
    grid = TimeGrid.continuous(20.0, 0.05)
    model = build_model(ModelId.of(ModelName.LINEAR_STANDARD, z0=1.0, sigma=0.7), grid)
    run = simulate(model, grid, seed=5)

    steps = grid.steps
    factors = 1.0 - np.asarray(model.beta(steps), dtype=float) * grid.dK
    ell = np.asarray(model.noise_coeff_field(steps, np.zeros(grid.n_steps)), dtype=float)
    products = np.cumprod(factors)
    closed = products * (model.z0 + np.cumsum(ell * run.noise.dm / products))
    np.testing.assert_allclose(run.z.values[1:], closed, rtol=1e-9, atol=1e-12)


@pytest.mark.slow
def test_martingale_parts_have_zero_mean():
    grid = TimeGrid.discrete(500)
    model = build_model(ModelId.of(ModelName.LINEAR_STANDARD, z0=1.0), grid)
    runs = simulate_many(model, grid, 21, 600)

    L_T = np.array([asymptotic_decomposition(run).martingale.final for run in runs])
    residual = np.array([decompose_z_squared(run).mart_residual.final for run in runs])
    for sample in (L_T, residual):
        assert abs(sample.mean()) <= 3.0 * sample.std(ddof=1) / np.sqrt(sample.size)
