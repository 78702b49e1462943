from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np


class Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


class ConditionId(str, Enum):
    A = "A"
    B_II = "B_ii"
    I_I1 = "I_i1"
    I_I2 = "I_i2"
    I_II = "I_ii"
    II_I = "II_i"
    II_II = "II_ii"
    S1_I1 = "S1_i1"
    S1_I2 = "S1_i2"
    S1_II = "S1_ii"
    S2_I = "S2_i"
    S2_II = "S2_ii"
    S2_DELTA = "S2_delta"
    RATE_DRIFT = "rate_drift"
    RATE_NOISE = "rate_noise"
    RATE_DRIFT_CONTINUOUS = "rate_drift_continuous"
    RATE_DRIFT_DISCRETE = "rate_drift_discrete"
    A_TILDE = "a_tilde"
    B_TILDE = "b_tilde"
    C_TILDE = "c_tilde"
    BC_TILDE = "bc_tilde"
    RATE_MONITOR = "rate_monitor"
    EXPANSION_D = "expansion_d"
    EXPANSION_E = "expansion_e"
    EXPANSION_F = "expansion_f"
    EXPANSION_G = "expansion_g"
    IMPLIES_S1_I = "implies_S1_I"
    IMPLIES_I_II = "implies_I_II"


CSV_COLUMNS = ["id", "verdict", "witness_step", "witness_u", "monitored_final", "threshold", "basis", "horizon", "note"]


@dataclass
class ConditionReport:
    condition_id: ConditionId
    verdict: Verdict
    evidence: Optional[np.ndarray] = None
    witness_step: Optional[int] = None
    witness_u: Optional[float] = None
    monitored_final: float = float("nan")
    threshold: float = float("nan")
    horizon: float = float("nan")
    basis: str = ""
    note: str = ""

    def __post_init__(self):
        self.condition_id = ConditionId(self.condition_id)
        self.verdict = Verdict(self.verdict)

    @property
    def holds(self) -> bool:
        return self.verdict == Verdict.HOLDS

    @property
    def fails(self) -> bool:
        return self.verdict == Verdict.FAILS

    def to_row(self) -> Dict[str, Any]:
        return {
            "id": self.condition_id.value,
            "verdict": self.verdict.value,
            "witness_step": "" if self.witness_step is None else self.witness_step,
            "witness_u": "" if self.witness_u is None else self.witness_u,
            "monitored_final": self.monitored_final,
            "threshold": self.threshold,
            "basis": self.basis,
            "horizon": self.horizon,
            "note": self.note,
        }


def by_id(reports: List[ConditionReport]) -> Dict[ConditionId, ConditionReport]:
    return {report.condition_id: report for report in reports}


def combine(verdicts: List[Verdict]) -> Verdict:
    """Worst verdict of a list: fails over inconclusive over holds."""
    if any(v == Verdict.FAILS for v in verdicts):
        return Verdict.FAILS
    if any(v == Verdict.INCONCLUSIVE for v in verdicts):
        return Verdict.INCONCLUSIVE
    return Verdict.HOLDS


@dataclass
class ReportSet:
    """Reports of one verification pass."""

    reports: List[ConditionReport] = field(default_factory=list)

    def extend(self, more: List[ConditionReport]) -> None:
        self.reports.extend(more)

    def get(self, condition_id) -> Optional[ConditionReport]:
        return by_id(self.reports).get(ConditionId(condition_id))

    def __iter__(self):
        return iter(self.reports)

    def __len__(self) -> int:
        return len(self.reports)
