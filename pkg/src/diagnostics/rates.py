import logging
from typing import List, Optional, Tuple

import numpy as np

from src.config import settings, DiagnosticsConfig
from src.core.calculus import step_integral
from src.core.errors import ValidationError
from src.core.grid import SamplePath
from src.diagnostics.classify import TailVerdict, decays, eventually_bounded, eventually_positive, finite_sum, infinite_sum
from src.diagnostics.report import ConditionId, ConditionReport, Verdict

logger = logging.getLogger(__name__)

RATE_SCAN_FRACTIONS = (0.125, 0.25, 0.375)


def validate_rate_exponents(delta: float, delta0: float) -> None:
    if not 0.0 < delta < delta0 <= 1.0:
        raise ValidationError(f"rate exponents require 0 < δ < δ0 <= 1, got δ={delta}, δ0={delta0}")


def _ratio(numerator, denominator) -> np.ndarray:
    safe = np.where(denominator != 0.0, denominator, 1.0)
    return np.where(denominator != 0.0, numerator / safe, 0.0)


def rate_exponent_density(gamma: np.ndarray, dK: np.ndarray, jump: np.ndarray, delta: float) -> np.ndarray:
    """r^δ with γ^δ = 1/ε(−r^δ∘K): (1 − (1 − x)^δ)/ΔK on jump steps, δg/γ on continuous ones."""
    dgamma = np.diff(gamma)
    x = dgamma / gamma[1:]
    g = _ratio(dgamma, dK)
    rbar = np.where(jump & (x > 0), _ratio(1.0 - (1.0 - x) ** delta, x), delta)
    return rbar * g / gamma[1:]


def averaged_gain(gamma: np.ndarray, beta_z: np.ndarray, dK: np.ndarray) -> np.ndarray:
    """A_t = (1/γ_t) Σ_{s<=t} β_s(z_{s-}) γ_s ΔK_s."""
    return step_integral(beta_z * gamma[1:], dK) / gamma


def _report(condition_id, tail: TailVerdict, horizon: float, evidence=None, note: str = "") -> ConditionReport:
    return ConditionReport(
        condition_id=condition_id,
        verdict=tail.verdict,
        evidence=evidence,
        witness_step=tail.witness_step,
        monitored_final=tail.monitored_final,
        threshold=tail.threshold,
        horizon=horizon,
        basis=tail.basis,
        note=note,
    )


def _rate_ids(grid) -> List[ConditionId]:
    deficit_id = ConditionId.RATE_DRIFT_DISCRETE if grid.is_discrete else ConditionId.RATE_DRIFT_CONTINUOUS
    return [ConditionId.RATE_DRIFT, ConditionId.RATE_NOISE, deficit_id, ConditionId.A_TILDE,
            ConditionId.B_TILDE, ConditionId.C_TILDE, ConditionId.BC_TILDE, ConditionId.RATE_MONITOR]


def _diverged_reports(run, delta: float, delta0: float) -> List[ConditionReport]:
    """A path that leaves the guard cannot satisfy γ^δ z² → 0; every path-based row fails there."""
    step = run.divergence
    logger.warning(f"Rate conditions on a run that diverged at step {step}")
    return [
        ConditionReport(cid, Verdict.FAILS, witness_step=step, horizon=run.grid.horizon, basis="divergence",
                        note=f"path ends at step {step}; delta={delta:g}, delta0={delta0:g}")
        for cid in _rate_ids(run.grid)
    ]


def check_rate_conditions(model, run, delta: float, delta0: Optional[float] = None,
                          thresholds: Optional[DiagnosticsConfig] = None) -> List[ConditionReport]:
    """Conditions under which γ_t^δ z_t² → 0, with their discrete-time equivalents."""
    spec = run.model if run is not None else model
    delta0 = spec.delta0 if delta0 is None else delta0
    validate_rate_exponents(delta, delta0)
    if run.diverged:
        return _diverged_reports(run, delta, delta0)

    t = thresholds or settings.diagnostics
    grid = run.grid
    dK = grid.dK
    jump = grid.jump_flag
    horizon = grid.horizon
    steps = grid.steps
    z = run.left_states()

    gamma = spec.gamma_path()
    if np.any(gamma <= 0) or np.any(np.diff(gamma) < 0):
        raise ValidationError("rate normalizer γ must be positive and nondecreasing")
    beta_z = np.asarray(spec.beta_field(steps, z), dtype=float)
    h = np.asarray(spec.qc_density(steps, z, z), dtype=float)
    x = np.diff(gamma) / gamma[1:]
    g = _ratio(np.diff(gamma), dK)

    r_delta = rate_exponent_density(gamma, dK, jump, delta)
    drift_integrand = (gamma[:-1] / gamma[1:]) ** (-delta) * np.maximum(
        r_delta - 2.0 * beta_z + np.where(jump, beta_z ** 2 * dK, 0.0), 0.0
    )
    drift_partial = step_integral(drift_integrand, dK)
    noise_partial = step_integral(gamma[1:] ** delta * h, dK)

    deficit = np.maximum(delta - _ratio(gamma[1:] * beta_z, g), 0.0)
    deficit = np.where(g > 0, deficit, 0.0)
    deficit_partial = step_integral(deficit, x)
    deficit_id = ConditionId.RATE_DRIFT_DISCRETE if grid.is_discrete else ConditionId.RATE_DRIFT_CONTINUOUS

    A = averaged_gain(gamma, beta_z, dK)
    b_partial = step_integral(np.maximum(delta - A[:-1], 0.0), x)
    c_partial = step_integral(np.maximum(A[:-1] - delta, 0.0), x)
    monitor = rate_monitor(run, gamma, delta)

    reports = [
        _report(ConditionId.RATE_DRIFT, finite_sum(drift_partial, grid, t), horizon, drift_partial),
        _report(ConditionId.RATE_NOISE, finite_sum(noise_partial, grid, t), horizon, noise_partial),
        _report(deficit_id, finite_sum(deficit_partial, grid, t), horizon, deficit_partial,
                note=f"delta={delta:g}"),
        _report(ConditionId.A_TILDE, eventually_bounded(A, grid, t), horizon, A),
        _report(ConditionId.B_TILDE, finite_sum(b_partial, grid, t), horizon, b_partial),
        _report(ConditionId.C_TILDE, infinite_sum(c_partial, grid, t), horizon, c_partial),
        _report(ConditionId.BC_TILDE, eventually_positive(A - delta0 / 2.0, grid), horizon, A - delta0 / 2.0,
                note=f"delta0={delta0:g}"),
        _report(ConditionId.RATE_MONITOR, monitor_decay_verdict(monitor), horizon, monitor.values,
                note=f"delta={delta:g}"),
    ]
    logger.info(
        f"Rate conditions (δ={delta:g}, δ0={delta0:g}): "
        + ", ".join(f"{r.condition_id.value}={r.verdict.value}" for r in reports)
    )
    return reports


def scan_rate_conditions(model, run, delta0: Optional[float] = None,
                         thresholds: Optional[DiagnosticsConfig] = None) -> Tuple[float, List[ConditionReport]]:
    """Run the rate checks for δ = δ0/8, δ0/4, 3δ0/8 and keep the best-scoring δ.

    Scored by the number of conditions that hold, then the fewest failures;
    ties go to the larger δ.
    """
    spec = run.model if run is not None else model
    delta0 = spec.delta0 if delta0 is None else delta0

    best = None
    for fraction in RATE_SCAN_FRACTIONS:
        delta = fraction * delta0
        reports = check_rate_conditions(model, run, delta, delta0, thresholds)
        holds = sum(r.verdict == Verdict.HOLDS for r in reports)
        fails = sum(r.verdict == Verdict.FAILS for r in reports)
        score = (holds, -fails, delta)
        if best is None or score > best[0]:
            best = (score, delta, reports)

    _, delta, reports = best
    logger.info(f"Rate scan over δ0={delta0:g} kept δ={delta:g}")
    return delta, reports


def rate_monitor(run, gamma_path, delta: float) -> SamplePath:
    """γ_t^δ z_t²."""
    gamma = np.asarray(gamma_path, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        values = gamma ** delta * run.z.values ** 2
    return SamplePath(grid=run.grid, values=values, divergence=run.divergence)


def monitor_decay_verdict(monitor: SamplePath) -> TailVerdict:
    return decays(monitor.values, monitor.grid)
