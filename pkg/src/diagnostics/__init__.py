from src.diagnostics.report import ConditionId, ConditionReport, ReportSet, Verdict, by_id, combine, CSV_COLUMNS
from src.diagnostics.classify import (
    TailVerdict,
    decays,
    eventually_bounded,
    eventually_positive,
    finite_sum,
    infinite_sum,
)
from src.diagnostics.convergence import (
    audit_implications,
    check_drift_sign,
    check_group_B,
    check_group_I,
    check_group_II,
    check_S1_S2,
    fit_gain_bounds,
    u_grid,
)
from src.diagnostics.rates import check_rate_conditions, monitor_decay_verdict, rate_monitor, scan_rate_conditions
from src.diagnostics.fixtures import FIXTURES, run_fixture, verdict_table

__all__ = [
    "ConditionId",
    "ConditionReport",
    "ReportSet",
    "Verdict",
    "by_id",
    "combine",
    "CSV_COLUMNS",
    "TailVerdict",
    "decays",
    "eventually_bounded",
    "eventually_positive",
    "finite_sum",
    "infinite_sum",
    "audit_implications",
    "check_drift_sign",
    "check_group_B",
    "check_group_I",
    "check_group_II",
    "check_S1_S2",
    "fit_gain_bounds",
    "u_grid",
    "check_rate_conditions",
    "monitor_decay_verdict",
    "rate_monitor",
    "scan_rate_conditions",
    "FIXTURES",
    "run_fixture",
    "verdict_table",
]
