import numpy as np
import pytest

from src.core.errors import ValidationError
from src.core.grid import TimeGrid
from src.diagnostics.convergence import (
    audit_implications,
    check_drift_sign,
    check_group_B,
    check_group_I,
    check_group_II,
    check_S1_S2,
    sample_steps,
    u_grid,
)
from src.diagnostics.rates import (
    check_rate_conditions,
    monitor_decay_verdict,
    rate_monitor,
    scan_rate_conditions,
    validate_rate_exponents,
)
from src.diagnostics.report import ConditionId, ConditionReport, Verdict, by_id
from src.engine.simulator import simulate, simulate_many
from src.models.registry import build_model, custom_model
from src.models.spec import ModelId, ModelName


def test_drift_sign_holds_for_linear_model(linear_model, continuous_grid):
    report = check_drift_sign(linear_model, u_grid(0.01), sample_steps(continuous_grid))
    assert report.condition_id == ConditionId.A
    assert report.verdict == Verdict.HOLDS


def test_drift_sign_fails_far_from_the_root(slow_gain_model, continuous_grid):
    report = check_drift_sign(slow_gain_model, u_grid(0.01), sample_steps(continuous_grid))
    assert report.verdict == Verdict.FAILS
    # β u − c u² changes sign at u = β/c = 10
    assert report.witness_u > 10.0


def test_drift_sign_detects_nonzero_root(continuous_grid):
    shifted = custom_model(continuous_grid, drift_field=lambda i, u: 1.0 - np.asarray(u, dtype=float),
                           beta=lambda i: np.ones_like(np.asarray(i, dtype=float)))
    report = check_drift_sign(shifted, [1.0, 2.0], [1, 2])
    assert report.verdict == Verdict.FAILS
    assert report.basis == "H(t,0)"


def test_drift_sign_rejects_zero_state(linear_model):
    with pytest.raises(ValidationError):
        check_drift_sign(linear_model, [0.0, 1.0], [1])
    with pytest.raises(ValidationError):
        check_drift_sign(linear_model, [], [1])


def test_square_integrable_noise_bound():
    grid = TimeGrid.continuous(1.0e4, 1.0)
    model = build_model(ModelId.of(ModelName.LINEAR_STANDARD), grid)
    report = check_group_B(model)
    assert report.condition_id == ConditionId.B_II
    assert report.verdict == Verdict.HOLDS


def test_s1_reports_for_linear_model(linear_model, continuous_grid):
    reports = by_id(check_S1_S2(linear_model, u_grid(0.1), continuous_grid))
    assert reports[ConditionId.S1_I1].holds
    assert reports[ConditionId.S1_I2].holds
    np.testing.assert_array_equal(reports[ConditionId.S2_I].evidence, 0.0)


def _reports(verdict, *ids):
    return [ConditionReport(cid, verdict, horizon=10.0) for cid in ids]


def test_implication_with_failed_premise_is_vacuous():
    s1 = _reports(Verdict.FAILS, ConditionId.S1_I1, ConditionId.S1_I2, ConditionId.S1_II)
    group_I = _reports(Verdict.FAILS, ConditionId.I_I1)
    [report] = audit_implications(s1=s1, group_I=group_I)
    assert report.condition_id == ConditionId.IMPLIES_S1_I
    assert report.verdict == Verdict.HOLDS
    assert report.basis == "vacuous"


def test_implication_flags_inconsistent_checkers():
    group_I = _reports(Verdict.HOLDS, ConditionId.I_I1, ConditionId.I_I2, ConditionId.I_II)
    group_II = _reports(Verdict.HOLDS, ConditionId.II_I) + _reports(Verdict.FAILS, ConditionId.II_II)
    [report] = audit_implications(group_I=group_I, group_II=group_II)
    assert report.condition_id == ConditionId.IMPLIES_I_II
    assert report.verdict == Verdict.FAILS
    assert report.basis == "consistency"


@pytest.mark.parametrize("delta, delta0", [(0.0, 1.0), (0.6, 0.5), (0.5, 1.2), (1.0, 1.0)])
def test_rate_exponents_are_validated(delta, delta0):
    with pytest.raises(ValidationError):
        validate_rate_exponents(delta, delta0)


def test_rate_conditions_follow_the_grid(linear_model, continuous_grid, seed):
    run = simulate(linear_model, continuous_grid, seed)
    ids = {r.condition_id for r in check_rate_conditions(linear_model, run, 0.5)}
    assert ConditionId.RATE_DRIFT_CONTINUOUS in ids
    assert ConditionId.RATE_DRIFT_DISCRETE not in ids

    grid = TimeGrid.discrete(200)
    model = build_model(ModelId.of(ModelName.LINEAR_STANDARD), grid)
    run = simulate(model, grid, seed)
    ids = {r.condition_id for r in check_rate_conditions(model, run, 0.5)}
    assert ConditionId.RATE_DRIFT_DISCRETE in ids


def test_rate_monitor_values(linear_model, continuous_grid, seed):
    run = simulate(linear_model, continuous_grid, seed)
    gamma = linear_model.gamma_path()
    monitor = rate_monitor(run, gamma, 0.5)
    np.testing.assert_allclose(monitor.values, np.sqrt(gamma) * run.z.values ** 2)


def test_rate_scan_keeps_one_of_three_exponents(linear_model, continuous_grid, seed):
    run = simulate(linear_model, continuous_grid, seed)
    delta0 = linear_model.delta0
    delta, reports = scan_rate_conditions(linear_model, run, delta0)
    assert any(delta == pytest.approx(f * delta0) for f in (0.125, 0.25, 0.375))

    direct = check_rate_conditions(linear_model, run, delta, delta0)
    assert [(r.condition_id, r.verdict) for r in reports] == [(r.condition_id, r.verdict) for r in direct]


def test_rate_monitor_of_zero_path_is_zero(continuous_grid):
    model = build_model(ModelId.of(ModelName.LINEAR_STANDARD, sigma=0.0, z0=0.0), continuous_grid)
    run = simulate(model, continuous_grid, 0)
    monitor = rate_monitor(run, model.gamma_path(), 0.5)
    np.testing.assert_array_equal(monitor.values, 0.0)
    assert monitor_decay_verdict(monitor).verdict == Verdict.HOLDS


def test_rate_monitor_decays_for_linear_model():
    # γ = (1+t)², so the monitor is (1+t)^0.45 z_t², of order (1+t)^-0.55
    grid = TimeGrid.continuous(1.0e3, 0.1)
    model = build_model(ModelId.of(ModelName.LINEAR_STANDARD), grid)
    gamma = model.gamma_path()
    runs = simulate_many(model, grid, 31, 40)
    decayed = [monitor_decay_verdict(rate_monitor(run, gamma, 0.225)).verdict == Verdict.HOLDS for run in runs]
    assert np.mean(decayed) >= 0.7


def test_rate_checks_include_the_monitor(linear_model, continuous_grid, seed):
    run = simulate(linear_model, continuous_grid, seed)
    reports = by_id(check_rate_conditions(linear_model, run, 0.5))
    assert reports[ConditionId.RATE_MONITOR].evidence.shape == run.z.values.shape


def test_group_I_jump_sum_is_empty_on_continuous_clock(continuous_grid):
    model = build_model(ModelId.of(ModelName.DETERMINISTIC_REGRESSION, c=0.5), continuous_grid)
    reports = by_id(check_group_I(model))
    assert reports[ConditionId.I_I2].verdict == Verdict.HOLDS
    np.testing.assert_array_equal(reports[ConditionId.I_I2].evidence, 0.0)


def test_group_II_positive_part_vanishes_for_small_gains(discrete_grid):
    model = build_model(ModelId.of(ModelName.LINEAR_STANDARD), discrete_grid)
    reports = by_id(check_group_II(model))
    assert reports[ConditionId.II_I].verdict == Verdict.HOLDS


def test_group_II_fails_without_drift(continuous_grid):
    model = build_model(ModelId.of(ModelName.CUSTOM, b=0.0), continuous_grid)
    reports = by_id(check_group_II(model))
    assert reports[ConditionId.II_II].verdict == Verdict.FAILS


def test_divergent_run_fails_every_rate_check():
    grid = TimeGrid.continuous(20.0, 0.01)
    model = build_model(ModelId.of(ModelName.CUSTOM, b=-5.0), grid)
    run = simulate(model, grid, 2)
    assert run.diverged

    reports = check_rate_conditions(model, run, 0.25)
    assert {r.verdict for r in reports} == {Verdict.FAILS}
    assert {r.witness_step for r in reports} == {run.divergence}
    assert ConditionId.RATE_MONITOR in by_id(reports)
    assert all(r.basis == "divergence" for r in reports)
