import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.config import settings
from src.core.calculus import inverse_exponential, step_integral
from src.core.errors import ValidationError
from src.core.grid import SamplePath
from src.diagnostics.classify import decays, finite_sum
from src.diagnostics.report import ConditionId, ConditionReport, Verdict
from src.engine.simulator import RmRun

logger = logging.getLogger(__name__)

REMAINDER_PART_NAMES = ("excision", "gain", "noise")


@dataclass(frozen=True, eq=False)
class Decomposition:
    """χ_t z_t = L_t/⟨L⟩_t^{1/2} + R_t along one run."""

    gamma: SamplePath
    martingale: SamplePath
    bracket: SamplePath
    chi: SamplePath
    remainder: SamplePath
    remainder_parts: Tuple[SamplePath, SamplePath, SamplePath]
    discretization: SamplePath
    residual: SamplePath
    beta: np.ndarray
    beta_bar: np.ndarray
    excised: np.ndarray
    z: SamplePath

    @property
    def grid(self):
        return self.z.grid

    @property
    def normalized_martingale(self) -> np.ndarray:
        return self.martingale.values / np.sqrt(self.bracket.values)

    def reconstruction_error(self) -> float:
        """Relative gap between the direct remainder and the residual χz − L/⟨L⟩^{1/2}."""
        gap = np.abs(self.remainder.values - self.residual.values)
        scale = max(1.0, float(np.max(np.abs(self.chi.values * self.z.values))))
        return float(np.max(gap)) / scale

    def initial_part(self) -> np.ndarray:
        return self.z.values[0] / np.sqrt(self.bracket.values)


def _guarded(grid, values) -> SamplePath:
    return SamplePath.guarded(grid, values, guard=np.inf)


def excision_mask(beta: np.ndarray, dK: np.ndarray) -> np.ndarray:
    return np.abs(beta * dK - 1.0) <= settings.numerics.excision_tol


def asymptotic_decomposition(run: RmRun) -> Decomposition:
    run.require_complete()
    spec = run.model
    grid = run.grid
    steps = grid.steps
    dK = grid.dK
    dm = run.noise.dm
    z = run.z.values
    u = z[:-1]
    zeros = np.zeros_like(u)

    beta = np.asarray(spec.beta(steps), dtype=float) + zeros
    excised = excision_mask(beta, dK)
    beta_bar = np.where(excised, 0.0, beta)
    if excised.any():
        logger.debug(f"Excised {int(excised.sum())} step(s) with βΔK = 1")

    gamma = inverse_exponential(beta_bar, grid).values
    g_right = gamma[1:]

    ell0 = np.asarray(spec.noise_coeff_field(steps, zeros), dtype=float)
    ell_u = np.asarray(spec.noise_coeff_field(steps, u), dtype=float)
    h00 = np.asarray(spec.qc_density(steps, zeros, zeros), dtype=float)
    beta_u = np.asarray(spec.beta_field(steps, u), dtype=float)

    with np.errstate(over="ignore", invalid="ignore"):
        martingale = step_integral(g_right * ell0, dm)
        bracket = 1.0 + step_integral(g_right ** 2 * h00, dK)
        root = np.sqrt(bracket)
        chi = gamma / root

        d_excision = np.where(excised, -u, 0.0)
        d_gain = (beta - beta_u) * u * dK
        d_noise = (ell_u - ell0) * dm
        parts = tuple(step_integral(g_right * d, 1.0) / root for d in (d_excision, d_gain, d_noise))

        x = beta_bar * dK
        drift_gap = np.where(grid.jump_flag, 0.0, gamma[:-1] * u * (np.exp(x) * (1.0 - x) - 1.0))
        discretization = step_integral(drift_gap, 1.0) / root

        remainder = z[0] / root + parts[0] + parts[1] + parts[2] + discretization
        residual = chi * z - martingale / root

    decomposition = Decomposition(
        gamma=_guarded(grid, gamma),
        martingale=_guarded(grid, martingale),
        bracket=_guarded(grid, bracket),
        chi=_guarded(grid, chi),
        remainder=_guarded(grid, remainder),
        remainder_parts=tuple(_guarded(grid, p) for p in parts),
        discretization=_guarded(grid, discretization),
        residual=_guarded(grid, residual),
        beta=beta,
        beta_bar=beta_bar,
        excised=excised,
        z=run.z,
    )

    if np.all(np.isfinite(chi)):
        error = decomposition.reconstruction_error()
        if error > settings.numerics.reconstruction_tol:
            logger.warning(f"Remainder reconstruction drift {error:.3e} on {spec.name.value}")
    return decomposition


def _monitor_report(condition_id, values: np.ndarray, grid, note: str) -> ConditionReport:
    tail = decays(values, grid)
    return ConditionReport(
        condition_id=condition_id,
        verdict=tail.verdict,
        evidence=values,
        witness_step=tail.witness_step,
        monitored_final=tail.monitored_final,
        threshold=tail.threshold,
        horizon=grid.horizon,
        basis=tail.basis,
        note=note,
    )


def check_expansion_conditions(run: RmRun, decomposition: Decomposition, epsilon: float,
                               delta0: Optional[float] = None) -> List[ConditionReport]:
    """Conditions under which the remainder R_t tends to 0 in probability."""
    spec = run.model
    delta0 = spec.delta0 if delta0 is None else delta0
    if not 0.5 - delta0 / 2.0 < epsilon < 0.5:
        raise ValidationError(f"expansion exponent requires 1/2 − δ0/2 < ε < 1/2, got ε={epsilon}, δ0={delta0}")

    grid = run.grid
    steps = grid.steps
    dK = grid.dK
    u = run.left_states()
    zeros = np.zeros_like(u)
    bracket = decomposition.bracket.values
    gamma = decomposition.gamma.values

    if spec.deterministic_gains:
        d_report = ConditionReport(ConditionId.EXPANSION_D, Verdict.HOLDS, horizon=grid.horizon,
                                   monitored_final=float(bracket[-1]), basis="deterministic",
                                   note="⟨L⟩ is non-random")
    else:
        d_report = ConditionReport(ConditionId.EXPANSION_D, Verdict.INCONCLUSIVE, horizon=grid.horizon,
                                   monitored_final=float(bracket[-1]), basis="random",
                                   note="⟨L⟩ depends on the path; no deterministic normalizer checked")

    jumps = step_integral(decomposition.excised.astype(float), 1.0)
    e_tail = finite_sum(jumps, grid)
    e_report = ConditionReport(ConditionId.EXPANSION_E, e_tail.verdict, evidence=jumps,
                               witness_step=e_tail.witness_step, monitored_final=e_tail.monitored_final,
                               threshold=e_tail.threshold, horizon=grid.horizon, basis=e_tail.basis,
                               note="count of steps with βΔK = 1")

    growth = decomposition.chi.values ** 2
    beta_u = np.asarray(spec.beta_field(steps, u), dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        f_integrand = np.abs(decomposition.beta - beta_u) * growth[:-1] ** epsilon * bracket[1:]
        f_monitor = step_integral(f_integrand, dK) / bracket

        h_uu = np.asarray(spec.qc_density(steps, u, u), dtype=float)
        h_u0 = np.asarray(spec.qc_density(steps, u, zeros), dtype=float)
        h_00 = np.asarray(spec.qc_density(steps, zeros, zeros), dtype=float)
        g_integrand = gamma[1:] ** 2 * (h_uu - 2.0 * h_u0 + h_00)
        g_monitor = step_integral(g_integrand, dK) / bracket

    f_report = _monitor_report(ConditionId.EXPANSION_F, f_monitor, grid, f"epsilon={epsilon:g}")
    if f_report.holds and not spec.expansion_guaranteed and f_report.basis != "zero":
        f_report.verdict = Verdict.INCONCLUSIVE
        f_report.note += "; outside the parameter range where the expansion is known to hold"
    g_report = _monitor_report(ConditionId.EXPANSION_G, g_monitor, grid, "")

    return [d_report, e_report, f_report, g_report]
