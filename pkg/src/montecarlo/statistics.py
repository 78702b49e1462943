import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import stats

from src.asymptotics.predictions import Prediction, Statistic
from src.core.errors import ValidationError

logger = logging.getLogger(__name__)

MIN_KS_SAMPLES = 20


def ks_statistic(samples, variance: float) -> float:
    """Sup distance between the empirical CDF and the N(0, variance) CDF."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < MIN_KS_SAMPLES:
        raise ValidationError(f"KS distance needs at least {MIN_KS_SAMPLES} samples, got {samples.size}")
    if not variance > 0:
        raise ValidationError("KS distance requires variance > 0")
    result = stats.kstest(samples, "norm", args=(0.0, float(np.sqrt(variance))))
    return float(result.statistic)


@dataclass(frozen=True)
class StatisticSummary:
    label: str
    statistic: Statistic
    time: float
    mean: float
    variance: float
    predicted: Optional[float]
    ks: float
    n: int
    divergent: int
    abs_q90: float
    note: str = ""

    def within(self, tolerance: float) -> bool:
        """Sample variance within a relative band of the predicted one."""
        if self.predicted is None:
            return False
        return abs(self.variance - self.predicted) <= tolerance * self.predicted


def summarize(label: str, statistic: Statistic, time: float, values: np.ndarray,
              excluded: np.ndarray, prediction: Prediction) -> StatisticSummary:
    kept = values[~excluded & np.isfinite(values)]
    divergent = int(values.size - kept.size)
    n = int(kept.size)

    mean = float(np.mean(kept)) if n else float("nan")
    variance = float(np.var(kept, ddof=1)) if n >= 2 else float("nan")
    abs_q90 = float(np.quantile(np.abs(kept), 0.9)) if n else float("nan")

    ks = float("nan")
    note = prediction.note
    if prediction.available and prediction.variance > 0 and n >= MIN_KS_SAMPLES:
        ks = ks_statistic(kept, prediction.variance)
    elif prediction.available and prediction.variance > 0:
        note = f"too few samples for KS ({n})"

    return StatisticSummary(
        label=label,
        statistic=statistic,
        time=time,
        mean=mean,
        variance=variance,
        predicted=prediction.variance,
        ks=ks,
        n=n,
        divergent=divergent,
        abs_q90=abs_q90,
        note=note,
    )


@dataclass(frozen=True)
class McSummary:
    model: str
    replications: int
    master_seed: int
    rows: Tuple[StatisticSummary, ...]
    elapsed: float = field(default=0.0, compare=False)

    @property
    def horizon(self) -> float:
        return max(row.time for row in self.rows)

    def row(self, label: str, time: Optional[float] = None) -> StatisticSummary:
        time = self.horizon if time is None else time
        for row in self.rows:
            if row.label == label and row.time == time:
                return row
        raise KeyError(f"No summary for {label} at t={time:g}")

    def variance_ratio(self) -> Optional[float]:
        """Averaged over plain terminal variance at the horizon, when both were collected."""
        try:
            plain = self.row(Statistic.Z_TERMINAL.value)
            averaged = self.row(Statistic.ZBAR_TERMINAL.value)
        except KeyError:
            return None
        if not plain.variance > 0:
            return None
        return averaged.variance / plain.variance
