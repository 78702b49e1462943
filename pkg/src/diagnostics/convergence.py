import logging
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.config import settings, DiagnosticsConfig
from src.core.calculus import step_integral
from src.core.errors import ValidationError
from src.core.grid import TimeGrid
from src.diagnostics.classify import TailVerdict, finite_sum, infinite_sum
from src.diagnostics.report import ConditionId, ConditionReport, Verdict, by_id, combine
from src.models.spec import ModelSpec

logger = logging.getLogger(__name__)

STEP_CHUNK = 2048


def u_grid(eps: float, points: Optional[int] = None) -> np.ndarray:
    """Log-uniform points on [ε, 1/ε] for both signs."""
    points = points or settings.diagnostics.u_points
    positive = np.geomspace(eps, 1.0 / eps, points)
    return np.concatenate((-positive[::-1], positive))


def sample_steps(grid: TimeGrid, count: int = 50) -> np.ndarray:
    return np.unique(np.geomspace(1, grid.n_steps, min(count, grid.n_steps)).astype(np.int64))


def _per_step(grid: TimeGrid, u: np.ndarray, fn: Callable, reducer: Callable) -> np.ndarray:
    """Reduce fn(i, u, dK, jump) over the u-grid for every step, in chunks of steps."""
    out = np.empty(grid.n_steps)
    row = u[None, :]
    for start in range(0, grid.n_steps, STEP_CHUNK):
        stop = min(grid.n_steps, start + STEP_CHUNK)
        i = grid.steps[start:stop][:, None]
        dK = grid.dK[start:stop][:, None]
        jump = grid.jump_flag[start:stop][:, None]
        with np.errstate(invalid="ignore", over="ignore"):
            values = np.broadcast_to(fn(i, row, dK, jump), (stop - start, u.size))
        out[start:stop] = reducer(values, axis=1)
    return out


def _drift(model: ModelSpec):
    return lambda i, u: np.asarray(model.drift_field(i, u), dtype=float)


def _report(condition_id, tail: TailVerdict, grid: TimeGrid, evidence=None, note: str = "") -> ConditionReport:
    return ConditionReport(
        condition_id=condition_id,
        verdict=tail.verdict,
        evidence=evidence,
        witness_step=tail.witness_step,
        monitored_final=tail.monitored_final,
        threshold=tail.threshold,
        horizon=grid.horizon,
        basis=tail.basis,
        note=note,
    )


def _fitted_report(condition_id, bound: np.ndarray, grid: TimeGrid, what: str) -> ConditionReport:
    finite = np.isfinite(bound)
    if finite.all():
        return ConditionReport(condition_id, Verdict.HOLDS, horizon=grid.horizon, basis="fitted",
                               monitored_final=float(np.max(bound, initial=0.0)),
                               note=f"{what} fitted on the u-grid")
    first = int(np.argmax(~finite))
    step = first + 1
    if np.isnan(bound[first]) and not np.isinf(bound).any():
        # NaN marks where the path's data ends, not an unbounded coefficient
        return ConditionReport(condition_id, Verdict.HOLDS, horizon=grid.horizon, basis="fitted",
                               monitored_final=float(np.max(bound[:first], initial=0.0)),
                               note=f"{what} fitted on the u-grid; finite to step {first}")
    return ConditionReport(condition_id, Verdict.FAILS, witness_step=step, horizon=grid.horizon,
                           basis="unbounded", note=f"{what} not finite")


def _over_eps(condition_id, grid, thresholds, eps_values, integrand_at) -> ConditionReport:
    """Required-infinite sums indexed by ε; the worst verdict over ε wins."""
    tails = []
    partial = None
    for eps in eps_values:
        partial = step_integral(integrand_at(u_grid(eps, thresholds.u_points)), grid.dK)
        tails.append((eps, infinite_sum(partial, grid, thresholds)))

    verdict = combine([tail.verdict for _, tail in tails])
    worst = next(tail for _, tail in tails if tail.verdict == verdict)
    note = "; ".join(f"eps={eps:g}:{tail.verdict.value}" for eps, tail in tails)
    return _report(condition_id, worst, grid, evidence=partial, note=note)


def check_drift_sign(model: ModelSpec, u_values: Sequence[float], t_steps: Sequence[int]) -> ConditionReport:
    u = np.asarray(u_values, dtype=float)
    steps = np.asarray(t_steps, dtype=np.int64)
    grid = model.grid
    if u.size == 0 or steps.size == 0:
        raise ValidationError("drift-sign check needs nonempty u and t grids")
    if np.any(u == 0.0):
        raise ValidationError("u grid must exclude 0")

    with np.errstate(invalid="ignore", over="ignore"):
        H = np.broadcast_to(_drift(model)(steps[:, None], u[None, :]), (steps.size, u.size))
        at_zero = np.broadcast_to(_drift(model)(steps, np.zeros(steps.size)), steps.shape)

    bad = ~np.isfinite(H)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        return ConditionReport(ConditionId.A, Verdict.INCONCLUSIVE, witness_step=int(steps[r]),
                               witness_u=float(u[c]), horizon=grid.horizon, basis="evaluator",
                               note="drift evaluator returned a non-finite value")

    nonzero = np.abs(at_zero) > settings.numerics.algebraic_tol
    if nonzero.any():
        k = int(np.argmax(nonzero))
        return ConditionReport(ConditionId.A, Verdict.FAILS, witness_step=int(steps[k]), witness_u=0.0,
                               monitored_final=float(at_zero[k]), horizon=grid.horizon, basis="H(t,0)",
                               note="H(t,0) != 0")

    broken = H * u[None, :] >= 0.0
    if broken.any():
        r, c = np.argwhere(broken)[0]
        return ConditionReport(ConditionId.A, Verdict.FAILS, witness_step=int(steps[r]), witness_u=float(u[c]),
                               monitored_final=float(H[r, c] * u[c]), threshold=0.0, horizon=grid.horizon,
                               basis="sign", note="H(t,u)u >= 0")

    return ConditionReport(ConditionId.A, Verdict.HOLDS, monitored_final=float(np.max(H * u[None, :])),
                           threshold=0.0, horizon=grid.horizon, basis="sign",
                           note=f"{steps.size} steps x {u.size} states")


def check_group_B(model: ModelSpec, run=None, thresholds: Optional[DiagnosticsConfig] = None) -> ConditionReport:
    """(B)(ii) with B_t fitted as max_u h_t(u,u)/(1+u²)."""
    spec = run.model if run is not None else model
    grid = spec.grid
    t = thresholds or settings.diagnostics
    u = u_grid(min(t.eps_values), t.u_points)

    B = _per_step(grid, u, lambda i, v, dK, jump: spec.qc_density(i, v, v) / (1.0 + v * v), np.max)
    partial = step_integral(B, grid.dK)
    return _report(ConditionId.B_II, finite_sum(partial, grid, t), grid, evidence=partial,
                   note="B_t fitted as max_u h_t(u,u)/(1+u^2)")


def check_group_I(model: ModelSpec, run=None, thresholds: Optional[DiagnosticsConfig] = None) -> List[ConditionReport]:
    spec = run.model if run is not None else model
    grid = spec.grid
    t = thresholds or settings.diagnostics
    H = _drift(spec)
    u = u_grid(min(t.eps_values), t.u_points)

    C = _per_step(grid, u, lambda i, v, dK, jump: np.where(jump, np.abs(H(i, v)) / (1.0 + np.abs(v)), 0.0), np.max)
    jump_dK = np.where(grid.jump_flag, grid.dK, 0.0)
    i2_partial = step_integral(C * C * jump_dK, grid.dK)

    def inf_v_minus(v):
        return _per_step(grid, v, lambda i, w, dK, jump: np.abs(2.0 * H(i, w) * w), np.min)

    reports = [
        _fitted_report(ConditionId.I_I1, C, grid, "C_t"),
        _report(ConditionId.I_I2, finite_sum(i2_partial, grid, t), grid, evidence=i2_partial),
        _over_eps(ConditionId.I_II, grid, t, t.eps_values, inf_v_minus),
    ]
    logger.info(f"Group (I) on {spec.name.value}: " + ", ".join(f"{r.condition_id.value}={r.verdict.value}" for r in reports))
    return reports


def _mixed(H, i, v, dK, jump):
    h = H(i, v)
    v_minus = 2.0 * h * v
    return np.where(jump, v_minus + h * h * dK, 0.0), v_minus


def check_group_II(model: ModelSpec, run=None, thresholds: Optional[DiagnosticsConfig] = None) -> List[ConditionReport]:
    spec = run.model if run is not None else model
    grid = spec.grid
    t = thresholds or settings.diagnostics
    H = _drift(spec)
    u = u_grid(min(t.eps_values), t.u_points)

    def positive_part(i, v, dK, jump):
        mixed, _ = _mixed(H, i, v, dK, jump)
        return np.where(jump, np.maximum(mixed, 0.0) / (1.0 + v * v), 0.0)

    D = _per_step(grid, u, positive_part, np.max)
    jump_dK = np.where(grid.jump_flag, grid.dK, 0.0)
    i_partial = step_integral(D, jump_dK)

    def negative_part(i, v, dK, jump):
        mixed, v_minus = _mixed(H, i, v, dK, jump)
        return np.where(jump, np.maximum(-mixed, 0.0), np.abs(v_minus))

    def inf_mixed(v):
        return _per_step(grid, v, negative_part, np.min)

    reports = [
        _report(ConditionId.II_I, finite_sum(i_partial, grid, t), grid, evidence=i_partial,
                note="D_t fitted as max_u [V-I+V+]+/(1+u^2)"),
        _over_eps(ConditionId.II_II, grid, t, t.eps_values, inf_mixed),
    ]
    logger.info(f"Group (II) on {spec.name.value}: " + ", ".join(f"{r.condition_id.value}={r.verdict.value}" for r in reports))
    return reports


def fit_gain_bounds(model: ModelSpec, u_values: np.ndarray, grid: TimeGrid):
    """G_t = min_u |H_t(u)|/|u| and G̃_t = max_u |H_t(u)|/|u|."""
    H = _drift(model)
    ratio = lambda i, v, dK, jump: np.abs(H(i, v)) / np.abs(v)
    return _per_step(grid, u_values, ratio, np.min), _per_step(grid, u_values, ratio, np.max)


def check_S1_S2(model: ModelSpec, u_values: Sequence[float], grid: TimeGrid,
                group_I: Optional[List[ConditionReport]] = None,
                thresholds: Optional[DiagnosticsConfig] = None) -> List[ConditionReport]:
    t = thresholds or settings.diagnostics
    u = np.asarray(u_values, dtype=float)
    u = u[u != 0.0]
    grid.require_same(model.grid, "model")
    G, G_tilde = fit_gain_bounds(model, u, grid)
    dK = grid.dK
    jump = grid.jump_flag
    jump_dK = np.where(jump, dK, 0.0)

    excess = G_tilde * dK - 2.0
    s1_i2 = step_integral(G_tilde ** 2 * jump_dK, dK)
    s1_ii = step_integral(G, dK)
    s2_i = step_integral(G_tilde * np.maximum(excess, 0.0), jump_dK)
    s2_ii = step_integral(G * np.where(jump, np.maximum(-excess, 0.0), 2.0), dK)
    s2_delta = step_integral(G * np.minimum(2.0, np.abs(excess)), dK)

    reports = [
        _fitted_report(ConditionId.S1_I1, G_tilde, grid, "G_t <= |H|/|u| <= G~_t"),
        _report(ConditionId.S1_I2, finite_sum(s1_i2, grid, t), grid, evidence=s1_i2),
        _report(ConditionId.S1_II, infinite_sum(s1_ii, grid, t), grid, evidence=s1_ii),
        _report(ConditionId.S2_I, finite_sum(s2_i, grid, t), grid, evidence=s2_i),
        _report(ConditionId.S2_II, infinite_sum(s2_ii, grid, t), grid, evidence=s2_ii),
        _report(ConditionId.S2_DELTA, infinite_sum(s2_delta, grid, t), grid, evidence=s2_delta,
                note="G min(2,|delta|) with delta = G~ dK - 2"),
    ]
    if group_I is not None:
        reports.extend(audit_implications(s1=reports, group_I=group_I))
    return reports


def _implication(condition_id, premise: List[ConditionReport], conclusion: List[ConditionReport],
                 horizon: float) -> ConditionReport:
    if not premise or any(not r.holds for r in premise):
        return ConditionReport(condition_id, Verdict.HOLDS, horizon=horizon, basis="vacuous",
                               note="premise not established")
    verdict = combine([r.verdict for r in conclusion])
    witness = next((r for r in conclusion if r.fails), None)
    return ConditionReport(
        condition_id,
        verdict,
        witness_step=witness.witness_step if witness else None,
        horizon=horizon,
        basis="consistency",
        note=", ".join(f"{r.condition_id.value}={r.verdict.value}" for r in conclusion),
    )


def audit_implications(s1: Optional[List[ConditionReport]] = None,
                       group_I: Optional[List[ConditionReport]] = None,
                       group_II: Optional[List[ConditionReport]] = None) -> List[ConditionReport]:
    """(S.1) ⇒ (I) and (I) ⇒ (II); a "fails" here means the checkers disagree with each other."""
    reports = []
    if s1 is not None and group_I is not None:
        s1_ids = (ConditionId.S1_I1, ConditionId.S1_I2, ConditionId.S1_II)
        premise = [r for key, r in by_id(s1).items() if key in s1_ids]
        horizon = group_I[0].horizon if group_I else float("nan")
        reports.append(_implication(ConditionId.IMPLIES_S1_I, premise, group_I, horizon))
    if group_I is not None and group_II is not None:
        horizon = group_II[0].horizon if group_II else float("nan")
        reports.append(_implication(ConditionId.IMPLIES_I_II, group_I, group_II, horizon))

    for report in reports:
        if report.fails:
            logger.warning(f"Implication audit {report.condition_id.value} failed: {report.note}")
    return reports
