"""Finite-horizon classifiers.

Statements about K_∞ cannot be decided from a finite run. Each classifier compares
the growth of a monitored quantity over the last decade of time [T/10, T] with the
previous decade [T/100, T/10] and with its total, and says "inconclusive" when
neither picture is clear.
"""
from dataclasses import dataclass, replace
from functools import wraps
from typing import Callable, Optional

import numpy as np

from src.config import settings, DiagnosticsConfig
from src.core.grid import TimeGrid
from src.diagnostics.report import Verdict


@dataclass(frozen=True)
class TailVerdict:
    verdict: Verdict
    witness_step: Optional[int]
    monitored_final: float
    threshold: float
    basis: str


@dataclass(frozen=True)
class DecadeIncrements:
    total: float
    last: float
    previous: float
    last_start: int

    @property
    def persistence(self) -> float:
        if self.previous <= 0:
            return np.inf if self.last > 0 else 0.0
        return self.last / self.previous


def decade_increments(partial: np.ndarray, grid: TimeGrid) -> DecadeIncrements:
    i0, i1, n = grid.decade_bounds()
    return DecadeIncrements(
        total=float(partial[n] - partial[0]),
        last=float(partial[n] - partial[i1]),
        previous=float(partial[i1] - partial[i0]),
        last_start=i1,
    )


def _on_finite_prefix(classify: Callable[..., TailVerdict]) -> Callable[..., TailVerdict]:
    """Classify only the part of the path before its first non-finite value.

    Paths that end early (a divergence marker, a saturated observation path) carry
    NaN tails; the decades are then measured on the shortened horizon.
    """
    @wraps(classify)
    def wrapper(values, grid: TimeGrid, *args, **kwargs) -> TailVerdict:
        values = np.asarray(values, dtype=float)
        bad = ~np.isfinite(values)
        if not bad.any():
            return classify(values, grid, *args, **kwargs)
        cut = int(np.argmax(bad))
        if cut < 2:
            return TailVerdict(Verdict.INCONCLUSIVE, cut, float("nan"), float("nan"), "non_finite")
        tail = classify(values[:cut], grid.prefix(cut - 1), *args, **kwargs)
        return replace(tail, basis=f"{tail.basis}; finite to step {cut - 1}")

    return wrapper


def _first_crossing(values: np.ndarray, start: int, level: float) -> int:
    hits = np.flatnonzero(values[start:] >= level)
    return start + int(hits[0]) if hits.size else values.size - 1


@_on_finite_prefix
def finite_sum(partial: np.ndarray, grid: TimeGrid, thresholds: Optional[DiagnosticsConfig] = None) -> TailVerdict:
    """Verdict for a nonnegative partial sum that is required to stay finite."""
    t = thresholds or settings.diagnostics
    d = decade_increments(partial, grid)
    final = float(partial[-1])

    if d.total == 0.0 or d.last <= t.flat_tail_ratio * abs(d.total):
        return TailVerdict(Verdict.HOLDS, None, final, t.flat_tail_ratio, "flat_tail")
    if d.last >= t.growth_ratio * abs(d.total):
        level = partial[d.last_start] + t.growth_ratio * abs(d.total)
        witness = _first_crossing(partial, d.last_start, level)
        return TailVerdict(Verdict.FAILS, witness, final, t.growth_ratio, "growth")
    if d.persistence >= t.persistence_ratio:
        return TailVerdict(Verdict.FAILS, grid.n_steps, final, t.persistence_ratio, "persistence")
    return TailVerdict(Verdict.INCONCLUSIVE, None, final, t.flat_tail_ratio, "")


@_on_finite_prefix
def infinite_sum(partial: np.ndarray, grid: TimeGrid, thresholds: Optional[DiagnosticsConfig] = None) -> TailVerdict:
    """Mirror of finite_sum for sums required to diverge; "holds" means growth was seen."""
    t = thresholds or settings.diagnostics
    d = decade_increments(partial, grid)
    final = float(partial[-1])

    if d.total == 0.0 or d.last <= t.flat_tail_ratio * abs(d.total):
        return TailVerdict(Verdict.FAILS, d.last_start, final, t.flat_tail_ratio, "flat_tail")
    if d.last >= t.growth_ratio * abs(d.total):
        return TailVerdict(Verdict.HOLDS, None, final, t.growth_ratio, "growth")
    if d.persistence >= t.persistence_ratio:
        return TailVerdict(Verdict.HOLDS, None, final, t.persistence_ratio, "persistence")
    return TailVerdict(Verdict.INCONCLUSIVE, None, final, t.growth_ratio, "")


def _half_bounds(grid: TimeGrid):
    t0 = grid.times[0]
    span = grid.horizon - t0
    return grid.index_at(t0 + span / 4.0), grid.index_at(t0 + span / 2.0)


@_on_finite_prefix
def eventually_bounded(values: np.ndarray, grid: TimeGrid,
                       thresholds: Optional[DiagnosticsConfig] = None) -> TailVerdict:
    t = thresholds or settings.diagnostics
    quarter, half = _half_bounds(grid)
    magnitude = np.abs(values)
    early = float(np.max(magnitude[quarter:max(half, quarter + 1)]))
    late = float(np.max(magnitude[half:]))
    limit = (1.0 + t.growth_ratio) * early

    if late <= limit:
        return TailVerdict(Verdict.HOLDS, None, float(values[-1]), limit, "bounded")
    witness = half + int(np.argmax(magnitude[half:] > limit))
    return TailVerdict(Verdict.FAILS, witness, float(values[-1]), limit, "growth")


@_on_finite_prefix
def eventually_positive(values: np.ndarray, grid: TimeGrid) -> TailVerdict:
    _, half = _half_bounds(grid)
    tail = values[half:]
    if np.all(tail > 0):
        return TailVerdict(Verdict.HOLDS, None, float(values[-1]), 0.0, "positive")
    witness = half + int(np.argmax(tail <= 0))
    return TailVerdict(Verdict.FAILS, witness, float(values[-1]), 0.0, "sign")


@_on_finite_prefix
def decays(values: np.ndarray, grid: TimeGrid) -> TailVerdict:
    """Running max over the last decade against the previous decade."""
    i0, i1, n = grid.decade_bounds()
    last = float(np.max(values[i1:n + 1]))
    previous = float(np.max(values[i0:i1 + 1]))
    if last == 0.0:
        return TailVerdict(Verdict.HOLDS, None, float(values[-1]), previous, "zero")
    if last < previous:
        return TailVerdict(Verdict.HOLDS, None, float(values[-1]), previous, "decay")
    witness = i1 + int(np.argmax(values[i1:n + 1]))
    return TailVerdict(Verdict.FAILS, witness, float(values[-1]), previous, "no_decay")
