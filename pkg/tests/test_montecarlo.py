import numpy as np
import pytest

from src.asymptotics.predictions import Prediction, Statistic
from src.core.errors import AllDivergentError, ValidationError
from src.core.rng import stream
from src.models.spec import ModelId, ModelName
from src.montecarlo.config import GridSpec, McConfig, StatisticSpec
from src.montecarlo.harness import blocks, checkpoint_steps, run_replications
from src.montecarlo.statistics import ks_statistic, summarize

FAST_GRID = GridSpec("continuous", horizon=100.0, dt=0.05)


def _columns(summary):
    return np.array([[row.mean, row.variance, row.ks, row.abs_q90] for row in summary.rows])


def test_ks_distance_of_matching_sample():
    n = 10_000
    samples = stream(3).standard_normal(n)
    assert ks_statistic(samples, 1.0) < 1.63 / np.sqrt(n)


def test_ks_distance_of_degenerate_sample():
    assert ks_statistic(np.zeros(100), 1.0) == pytest.approx(0.5)


def test_ks_distance_detects_wrong_variance():
    samples = 2.0 * stream(5).standard_normal(10_000)
    assert ks_statistic(samples, 1.0) > 0.12


def test_ks_needs_enough_samples_and_positive_variance():
    with pytest.raises(ValidationError):
        ks_statistic(np.zeros(19), 1.0)
    with pytest.raises(ValidationError):
        ks_statistic(np.zeros(50), 0.0)


def test_summary_drops_excluded_and_non_finite_values():
    values = np.array([1.0, -1.0, np.nan, 100.0] * 10)
    excluded = np.zeros(values.size, dtype=bool)
    excluded[3::4] = True
    prediction = Prediction(Statistic.Z_TERMINAL, "z", variance=1.0)
    row = summarize("z_terminal", Statistic.Z_TERMINAL, 10.0, values, excluded, prediction)
    assert row.n == 20
    assert row.divergent == 20
    assert row.mean == 0.0
    assert row.within(0.1)


def test_statistic_labels():
    assert StatisticSpec.parse("rate_monitor(0.25)").label == "rate_monitor(0.25)"
    assert StatisticSpec.parse(" chi_z ").statistic == Statistic.CHI_Z
    with pytest.raises(ValidationError):
        StatisticSpec.parse("rate_monitor")
    with pytest.raises(ValidationError):
        StatisticSpec(Statistic.CHI_Z, 0.5)


def test_blocks_and_checkpoints():
    assert [len(b) for b in blocks(7, 3)] == [3, 3, 1]
    grid = GridSpec("discrete", steps=100).build()
    assert checkpoint_steps(grid, [0.0, 10.0, 250.0]) == [10, 100]


def test_config_validation():
    config = McConfig(ModelId.of(ModelName.LINEAR_STANDARD), FAST_GRID, replications=1, master_seed=0)
    with pytest.raises(ValidationError):
        config.validate()
    with pytest.raises(ValidationError):
        GridSpec("discrete", steps=10, dt=0.1).validate()


def test_noiseless_model_has_zero_variance(block_size):
    block_size(50)
    config = McConfig(ModelId.of(ModelName.LINEAR_STANDARD, sigma=0.0), GridSpec("continuous", horizon=10.0, dt=0.1),
                      replications=100, master_seed=1)
    summary = run_replications(config)
    row = summary.row("z_terminal")
    assert row.variance == 0.0
    assert row.predicted == 0.0
    assert np.isnan(row.ks)


def test_results_do_not_depend_on_threads(block_size):
    block_size(3)
    config = McConfig(ModelId.of(ModelName.RM_SLOW_GAIN), GridSpec("continuous", horizon=20.0, dt=0.1),
                      replications=10, master_seed=77,
                      statistics=(StatisticSpec("z_terminal"), StatisticSpec("chi_z"), StatisticSpec("remainder_R")),
                      checkpoints=(5.0,))
    single = run_replications(config, threads=1)
    pooled = run_replications(config, threads=4)
    assert [(r.label, r.time) for r in single.rows] == [(r.label, r.time) for r in pooled.rows]
    np.testing.assert_array_equal(_columns(single), _columns(pooled))


def test_results_do_not_depend_on_block_size(block_size):
    config = McConfig(ModelId.of(ModelName.LINEAR_STANDARD), GridSpec("continuous", horizon=20.0, dt=0.1),
                      replications=12, master_seed=9)
    block_size(4)
    small = run_replications(config)
    block_size(12)
    whole = run_replications(config)
    np.testing.assert_allclose(_columns(small), _columns(whole), rtol=1e-12, equal_nan=True)


def test_all_divergent_replications(block_size):
    block_size(4)
    config = McConfig(ModelId.of(ModelName.CUSTOM, b=-5.0), GridSpec("continuous", horizon=20.0, dt=0.01),
                      replications=4, master_seed=2)
    with pytest.raises(AllDivergentError):
        run_replications(config)


def test_progress_counts_every_replication(block_size):
    block_size(5)
    seen = []
    config = McConfig(ModelId.of(ModelName.LINEAR_STANDARD), GridSpec("discrete", steps=50),
                      replications=12, master_seed=4)
    run_replications(config, threads=2, progress=seen.append)
    assert sorted(seen) == [2, 5, 5]


def test_linear_standard_limits_at_moderate_horizon():
    config = McConfig(ModelId.of(ModelName.LINEAR_STANDARD), FAST_GRID, replications=2000, master_seed=11,
                      statistics=(StatisticSpec("z_terminal"), StatisticSpec("chi_z")))
    summary = run_replications(config)
    for label in ("z_terminal", "chi_z"):
        row = summary.row(label)
        assert row.n == 2000
        assert row.within(0.15), f"{label}: variance {row.variance:.4f}"
    assert summary.variance_ratio() is None


@pytest.mark.slow
def test_linear_standard_terminal_limits():
    config = McConfig(ModelId.of(ModelName.LINEAR_STANDARD), GridSpec("continuous", horizon=1.0e3, dt=0.01),
                      replications=2000, master_seed=14,
                      statistics=(StatisticSpec("z_terminal"), StatisticSpec("zbar_terminal")))
    summary = run_replications(config)

    z = summary.row("z_terminal")
    assert z.predicted == pytest.approx(1.0)
    assert z.within(0.15), f"z_terminal: variance {z.variance:.4f}"
    assert z.ks < 0.0364

    zbar = summary.row("zbar_terminal")
    assert zbar.predicted == pytest.approx(2.0)
    assert zbar.within(0.15), f"zbar_terminal: variance {zbar.variance:.4f}"


@pytest.mark.slow
def test_self_normalized_limits_for_standard_gain():
    config = McConfig(ModelId.of(ModelName.LINEAR_STANDARD), GridSpec("continuous", horizon=1.0e3, dt=0.01),
                      replications=2000, master_seed=12,
                      statistics=(StatisticSpec("chi_z"), StatisticSpec("zbar_eps")))
    summary = run_replications(config)
    for label, variance in (("chi_z", 1.0), ("zbar_eps", 2.0)):
        row = summary.row(label)
        assert row.predicted == variance
        assert row.within(0.15), f"{label}: variance {row.variance:.4f}"
        assert row.ks < 0.0364


@pytest.mark.slow
def test_nonlinear_slow_gain_limits():
    config = McConfig(ModelId.of(ModelName.RM_SLOW_GAIN, r=0.9), GridSpec("continuous", horizon=1.0e4, dt=0.05),
                      replications=1000, master_seed=13,
                      statistics=(StatisticSpec("z_terminal"), StatisticSpec("zbar_terminal"),
                                  StatisticSpec("remainder_R")),
                      checkpoints=(1.0e3,))
    summary = run_replications(config)
    assert summary.row("z_terminal").predicted == pytest.approx(0.25)
    assert summary.row("zbar_terminal").predicted == pytest.approx(1.0)
    assert summary.row("z_terminal").within(0.2)
    assert summary.row("zbar_terminal").within(0.2)
    assert summary.variance_ratio() is not None

    early = next(r for r in summary.rows if r.label == "remainder_R" and r.time < summary.horizon).abs_q90
    late = summary.row("remainder_R").abs_q90
    assert late < 0.5 * early
