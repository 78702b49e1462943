import numpy as np
import pytest

from src.asymptotics.averaging import WeightKind, alpha_average, plain_average
from src.asymptotics.normalization import asymptotic_decomposition
from src.asymptotics.online import OnlineDecomposition
from src.core.rng import streams
from src.engine.simulator import simulate
from src.engine.stepper import EulerStepper


def _online(model, grid, seed, **kwargs):
    online = OnlineDecomposition(grid, **kwargs)
    EulerStepper(model, grid, streams(seed, [0])).run([online])
    return online


@pytest.mark.parametrize("fixture_name", ["linear_model", "slow_gain_model"])
def test_online_terminal_values_match_batch(fixture_name, continuous_grid, seed, request):
    model = request.getfixturevalue(fixture_name)
    run = simulate(model, continuous_grid, seed, stream_index=0)
    decomposition = asymptotic_decomposition(run)
    snapshot = _online(model, continuous_grid, seed).at()

    assert snapshot["z"][0] == pytest.approx(run.z.final, rel=1e-12)
    assert snapshot["chi"][0] == pytest.approx(decomposition.chi.final, rel=1e-9)
    assert snapshot["remainder"][0] == pytest.approx(decomposition.residual.final, rel=1e-8, abs=1e-10)

    averaged = alpha_average(run.z, decomposition, 1.0)
    assert snapshot["eps_alpha"][0] == pytest.approx(averaged.eps.final, rel=1e-9)
    assert snapshot["zbar_alpha"][0] == pytest.approx(averaged.zbar.final, rel=1e-8, abs=1e-12)
    assert snapshot["zbar"][0] == pytest.approx(averaged.zbar.final, rel=1e-8, abs=1e-12)


def test_online_plain_weight_matches_batch(linear_model, continuous_grid, seed):
    run = simulate(linear_model, continuous_grid, seed, stream_index=0)
    snapshot = _online(linear_model, continuous_grid, seed, weight_kind=WeightKind.PLAIN_K).at()
    assert snapshot["zbar"][0] == pytest.approx(plain_average(run.z).zbar.final, rel=1e-9, abs=1e-12)


def test_checkpoints_and_rate_monitors(linear_model, continuous_grid, seed):
    run = simulate(linear_model, continuous_grid, seed, stream_index=0)
    online = _online(linear_model, continuous_grid, seed, deltas=(0.5,), checkpoints=(0, 100))

    assert set(online.snapshots) == {0, 100, continuous_grid.n_steps}
    assert online.at(0)["z"][0] == linear_model.z0
    assert online.at(100)["z"][0] == pytest.approx(run.z.values[100], rel=1e-12)

    gamma = linear_model.gamma_path()[-1]
    expected = gamma ** 0.5 * run.z.final ** 2
    assert online.at()["rate_0.5"][0] == pytest.approx(expected, rel=1e-12)
    np.testing.assert_array_equal(online.at(0)["remainder"], online.at(0)["z"])
