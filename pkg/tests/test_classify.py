import numpy as np
import pytest

from src.config import settings
from src.core.grid import TimeGrid
from src.diagnostics.classify import decays, eventually_bounded, eventually_positive, finite_sum, infinite_sum
from src.diagnostics.report import ConditionId, ConditionReport, ReportSet, Verdict, combine


@pytest.fixture
def grid():
    return TimeGrid.discrete(1000)


def test_convergent_sum_is_finite(grid):
    partial = 1.0 - 1.0 / (1.0 + grid.K)
    tail = finite_sum(partial, grid)
    assert tail.verdict == Verdict.HOLDS
    assert tail.basis == "flat_tail"
    assert infinite_sum(partial, grid).verdict == Verdict.FAILS


def test_logarithmic_sum_grows(grid):
    partial = np.log1p(grid.K)
    tail = finite_sum(partial, grid)
    assert tail.verdict == Verdict.FAILS
    assert tail.basis == "growth"
    assert 100 <= tail.witness_step <= 1000
    assert infinite_sum(partial, grid).verdict == Verdict.HOLDS


def test_zero_sum(grid):
    partial = np.zeros(grid.n_steps + 1)
    assert finite_sum(partial, grid).verdict == Verdict.HOLDS
    assert infinite_sum(partial, grid).verdict == Verdict.FAILS


def test_tighter_threshold_leaves_slow_tail_undecided(grid):
    thresholds = settings.diagnostics_with({"flat_tail_ratio": 0.001})
    partial = 1.0 - 1.0 / (1.0 + grid.K)
    assert finite_sum(partial, grid, thresholds).verdict == Verdict.INCONCLUSIVE


def test_unknown_threshold_is_rejected():
    with pytest.raises(KeyError):
        settings.diagnostics_with({"u_points": 3})
    with pytest.raises(KeyError):
        settings.diagnostics_with({"not_a_threshold": 1.0})


def test_decay_classifier(grid):
    assert decays(1.0 / (1.0 + grid.K), grid).verdict == Verdict.HOLDS
    assert decays(np.zeros(grid.n_steps + 1), grid).basis == "zero"
    flat = decays(np.ones(grid.n_steps + 1), grid)
    assert flat.verdict == Verdict.FAILS
    assert flat.basis == "no_decay"


def test_boundedness_and_sign(grid):
    assert eventually_bounded(np.sin(grid.K), grid).verdict == Verdict.HOLDS
    assert eventually_bounded(grid.K, grid).verdict == Verdict.FAILS
    assert eventually_positive(1.0 / (1.0 + grid.K), grid).verdict == Verdict.HOLDS
    negative = eventually_positive(grid.K - 900.0, grid)
    assert negative.verdict == Verdict.FAILS
    assert negative.witness_step == 500


def test_combine_prefers_the_worst_verdict():
    assert combine([Verdict.HOLDS, Verdict.HOLDS]) == Verdict.HOLDS
    assert combine([Verdict.HOLDS, Verdict.INCONCLUSIVE]) == Verdict.INCONCLUSIVE
    assert combine([Verdict.INCONCLUSIVE, Verdict.FAILS, Verdict.HOLDS]) == Verdict.FAILS


def test_report_rows_and_lookup():
    report = ConditionReport("A", "holds", witness_u=2.0, basis="sign")
    row = report.to_row()
    assert row["id"] == "A"
    assert row["witness_step"] == ""
    assert row["witness_u"] == 2.0

    reports = ReportSet()
    reports.extend([report])
    assert reports.get(ConditionId.A) is report
    assert reports.get("B_ii") is None
    assert len(reports) == 1


def test_nan_tail_is_classified_on_the_finite_prefix(grid):
    partial = np.log1p(grid.K)
    partial[601:] = np.nan
    tail = finite_sum(partial, grid)
    assert tail.verdict == Verdict.FAILS
    assert tail.witness_step <= 600
    assert tail.basis.endswith("finite to step 600")

    flat = 1.0 - 1.0 / (1.0 + grid.K) ** 2
    flat[601:] = np.nan
    assert finite_sum(flat, grid).verdict == Verdict.HOLDS


def test_path_without_finite_prefix_is_inconclusive(grid):
    partial = np.full(grid.n_steps + 1, np.nan)
    tail = finite_sum(partial, grid)
    assert tail.verdict == Verdict.INCONCLUSIVE
    assert tail.basis == "non_finite"
