"""Reference scenarios with known verdicts.

The gain-schedule fixtures are deterministic (ℓ ≡ 0, closed-form Euler path); the
Galton–Watson fixtures use a fixed seed.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.grid import TimeGrid
from src.diagnostics.convergence import check_group_I, check_group_II
from src.diagnostics.rates import check_rate_conditions
from src.diagnostics.report import ConditionId, Verdict, by_id
from src.engine.simulator import RmRun, noiseless_run, simulate
from src.models.registry import build_model, schedule_model
from src.models.spec import ModelId, ModelName

logger = logging.getLogger(__name__)

FIXTURE_SEED = 20240611

H, F = Verdict.HOLDS, Verdict.FAILS


@dataclass(frozen=True)
class Expectation:
    condition_id: ConditionId
    verdict: Verdict
    delta: Optional[float] = None


@dataclass(frozen=True)
class Fixture:
    name: str
    description: str
    build: Callable[[], RmRun]
    expectations: Tuple[Expectation, ...]
    delta0: float = 1.0


@dataclass(frozen=True)
class FixtureOutcome:
    fixture: str
    condition_id: ConditionId
    delta: Optional[float]
    expected: Verdict
    observed: Verdict

    @property
    def matches(self) -> bool:
        return self.expected == self.observed


def _schedule_run(grid: TimeGrid, beta_gamma: np.ndarray, gamma: np.ndarray) -> RmRun:
    """ℓ ≡ 0 run for a schedule given as β_tγ_t per step and γ per grid point."""
    beta = beta_gamma / gamma[1:]
    model = schedule_model(grid, beta, gamma)
    return noiseless_run(model, grid)


def _unbounded_average_gain() -> RmRun:
    grid = TimeGrid.continuous(1.0e4, 0.5)
    t = grid.times
    gamma = t + 1.0
    beta = (t[:-1] + 1.0) ** -0.75
    return noiseless_run(schedule_model(grid, beta, gamma), grid)


def _harmonic_gamma(n_steps: int) -> np.ndarray:
    gamma = np.arange(n_steps + 1, dtype=float)
    gamma[0] = 1.0
    return gamma


def _alternating_gain(n_steps: int = 1_000_000, a: float = 0.5, b: float = 0.25) -> RmRun:
    t = np.arange(1, n_steps + 1)
    beta_gamma = np.where(t % 2 == 1, 0.5 + a, 0.5 - b)
    return _schedule_run(TimeGrid.discrete(n_steps), beta_gamma, _harmonic_gamma(n_steps))


def _log_deficit_gain(n_steps: int = 1_000_000) -> RmRun:
    t = np.arange(1, n_steps + 1, dtype=float)
    beta_gamma = np.maximum(0.5 - 1.0 / np.log(t + 1.0), 0.0)
    return _schedule_run(TimeGrid.discrete(n_steps), beta_gamma, _harmonic_gamma(n_steps))


def _harmonic_deficit_gain(n_steps: int = 1_000_000) -> RmRun:
    t = np.arange(1, n_steps + 1, dtype=float)
    beta_gamma = np.where(t >= 2, 0.5 - 1.0 / t, 0.0)
    return _schedule_run(TimeGrid.discrete(n_steps), beta_gamma, _harmonic_gamma(n_steps))


def _geometric_gain(n_steps: int = 400, q: float = 2.0, beta_prime: float = 2.0) -> RmRun:
    grid = TimeGrid.discrete(n_steps)
    n = np.arange(n_steps + 1, dtype=float)
    gamma = (q ** (n + 1.0) - 1.0) / (q - 1.0)
    x = np.diff(gamma) / gamma[1:]
    alpha = q / (q - 1.0)
    return noiseless_run(schedule_model(grid, (alpha / beta_prime) * x, gamma), grid)


def _galton_watson(theta: float, n_steps: int) -> Callable[[], RmRun]:
    def build() -> RmRun:
        grid = TimeGrid.discrete(n_steps)
        model = build_model(ModelId.of(ModelName.GALTON_WATSON, theta=theta), grid)
        return simulate(model, grid, FIXTURE_SEED)

    return build


FIXTURES: Dict[str, Fixture] = {
    fixture.name: fixture
    for fixture in (
        Fixture(
            "unbounded_average_gain",
            "K = γ = t + 1, β_t = (t+1)^-(1/2+α), α = 1/4: drift deficit finite, averaged gain unbounded",
            _unbounded_average_gain,
            (
                Expectation(ConditionId.RATE_DRIFT_CONTINUOUS, H, 0.3),
                Expectation(ConditionId.A_TILDE, F, 0.3),
                Expectation(ConditionId.B_TILDE, H, 0.3),
                Expectation(ConditionId.C_TILDE, H, 0.3),
            ),
        ),
        Fixture(
            "alternating_gain",
            "γ_t = t, β_tγ_t alternates 1 and 1/4: discrete drift deficit fails below 1/2",
            _alternating_gain,
            (
                Expectation(ConditionId.RATE_DRIFT_DISCRETE, F, 0.4),
                Expectation(ConditionId.A_TILDE, H, 0.4),
                Expectation(ConditionId.B_TILDE, H, 0.4),
                Expectation(ConditionId.C_TILDE, H, 0.4),
                Expectation(ConditionId.BC_TILDE, H, 0.4),
            ),
        ),
        Fixture(
            "log_deficit_gain",
            "γ_t = t, β_tγ_t = [1/2 − 1/log(t+1)]+: deficit finite at δ = 0.4, not at δ = 1/2",
            _log_deficit_gain,
            (
                Expectation(ConditionId.RATE_DRIFT_DISCRETE, H, 0.4),
                Expectation(ConditionId.A_TILDE, H, 0.4),
                Expectation(ConditionId.B_TILDE, H, 0.4),
                Expectation(ConditionId.C_TILDE, H, 0.4),
                Expectation(ConditionId.BC_TILDE, F, 0.4),
                Expectation(ConditionId.RATE_DRIFT_DISCRETE, F, 0.5),
            ),
        ),
        Fixture(
            "harmonic_deficit_gain",
            "γ_t = t, β_tγ_t = 1/2 − 1/t: deficit finite even at δ = 1/2, averaged gain stays below 1/2",
            _harmonic_deficit_gain,
            (
                Expectation(ConditionId.RATE_DRIFT_DISCRETE, H, 0.5),
                Expectation(ConditionId.A_TILDE, H, 0.4),
                Expectation(ConditionId.B_TILDE, H, 0.4),
                Expectation(ConditionId.C_TILDE, H, 0.4),
                Expectation(ConditionId.BC_TILDE, F, 0.4),
            ),
        ),
        Fixture(
            "geometric_gain",
            "γ_t = 2^(t+1) − 1, β_t proportional to Δγ/γ: every rate condition holds",
            _geometric_gain,
            tuple(
                Expectation(cid, H, 0.5)
                for cid in (
                    ConditionId.RATE_DRIFT,
                    ConditionId.RATE_NOISE,
                    ConditionId.A_TILDE,
                    ConditionId.B_TILDE,
                    ConditionId.C_TILDE,
                    ConditionId.BC_TILDE,
                )
            ),
        ),
        Fixture(
            "gw_subcritical",
            "Galton–Watson with immigration, θ = 0.5, 10^4 generations",
            _galton_watson(0.5, 10_000),
            (
                Expectation(ConditionId.I_I2, H),
                Expectation(ConditionId.II_I, H),
                Expectation(ConditionId.II_II, H),
            ),
        ),
        Fixture(
            "gw_supercritical",
            "Galton–Watson with immigration, θ = 2, 10^3 generations",
            _galton_watson(2.0, 1_000),
            (
                Expectation(ConditionId.I_I2, F),
                Expectation(ConditionId.II_I, H),
                Expectation(ConditionId.II_II, H),
            ),
        ),
    )
}


def _observe(fixture: Fixture, run: RmRun) -> Dict[Tuple[Optional[float], ConditionId], Verdict]:
    observed = {}
    deltas = sorted({e.delta for e in fixture.expectations if e.delta is not None})
    for delta in deltas:
        for report in check_rate_conditions(run.model, run, delta, fixture.delta0):
            observed[(delta, report.condition_id)] = report.verdict
    if any(e.delta is None for e in fixture.expectations):
        reports = by_id(check_group_I(run.model, run) + check_group_II(run.model, run))
        for cid, report in reports.items():
            observed[(None, cid)] = report.verdict
    return observed


def run_fixture(name: str) -> List[FixtureOutcome]:
    try:
        fixture = FIXTURES[name]
    except KeyError:
        raise KeyError(f"Unknown fixture: {name}") from None

    observed = _observe(fixture, fixture.build())
    outcomes = [
        FixtureOutcome(
            fixture=name,
            condition_id=e.condition_id,
            delta=e.delta,
            expected=e.verdict,
            observed=observed.get((e.delta, e.condition_id), Verdict.INCONCLUSIVE),
        )
        for e in fixture.expectations
    ]
    mismatches = [o for o in outcomes if not o.matches]
    if mismatches:
        logger.warning(f"Fixture {name}: {len(mismatches)} verdict(s) differ from the reference table")
    else:
        logger.info(f"Fixture {name}: all {len(outcomes)} verdicts match")
    return outcomes


def verdict_table(names: Optional[Sequence[str]] = None) -> List[FixtureOutcome]:
    outcomes = []
    for name in names or list(FIXTURES):
        outcomes.extend(run_fixture(name))
    return outcomes
