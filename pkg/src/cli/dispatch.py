import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from src.asymptotics.averaging import (
    AveragingResult,
    WeightKind,
    alpha_average,
    b_tilde_identity,
    b_tilde_ratio,
    plain_average,
    polyak_average,
)
from src.asymptotics.normalization import Decomposition, asymptotic_decomposition, check_expansion_conditions
from src.cli.config_file import RunConfig, Subcommand, emit_config
from src.cli.output import MC_COLUMNS, header_line, write_columns, write_csv, write_text
from src.diagnostics.convergence import (
    audit_implications,
    check_drift_sign,
    check_group_B,
    check_group_I,
    check_group_II,
    check_S1_S2,
    sample_steps,
)
from src.diagnostics.rates import check_rate_conditions, scan_rate_conditions
from src.diagnostics.report import CSV_COLUMNS, ConditionId, ConditionReport, Verdict
from src.engine.simulator import RmRun, simulate
from src.engine.squares import Representation, decompose_z_squared
from src.models.registry import build_model, resolve_parameters
from src.montecarlo.harness import run_replications
from src.montecarlo.statistics import McSummary
from src.ui.report import ReportView

logger = logging.getLogger(__name__)


@dataclass
class DispatchResult:
    subcommand: Subcommand
    exit_code: int = 0
    artifacts: List[Path] = field(default_factory=list)
    reports: List[ConditionReport] = field(default_factory=list)
    summary: Optional[McSummary] = None


class Dispatcher:
    def __init__(self, config: RunConfig, view: Optional[ReportView] = None,
                 threads: Optional[int] = None):
        self._config = config
        self._view = view or ReportView(record=True)
        self._threads = threads or config.threads
        self._out = Path(config.output_dir)
        self._header = header_line(emit_config(config), config.seed)
        self._grid = config.grid.build()
        self._model = build_model(config.model, self._grid)

    def run(self) -> DispatchResult:
        config = self._config
        handlers: Dict[Subcommand, Callable[[DispatchResult], None]] = {
            Subcommand.SIMULATE: self._simulate,
            Subcommand.DECOMPOSE: self._decompose,
            Subcommand.AVERAGE: self._average,
            Subcommand.VERIFY: self._verify,
            Subcommand.MC: self._mc,
        }
        result = DispatchResult(subcommand=config.subcommand)
        self._render_header()
        handlers[config.subcommand](result)
        result.artifacts.append(write_text(self._out / "report.txt", self._header, self._view.export_text()))
        logger.info(f"{config.subcommand.value} finished, {len(result.artifacts)} artifact(s) in {self._out}")
        return result

    def _render_header(self) -> None:
        config = self._config
        params = ", ".join(f"{k}={v:g}" for k, v in resolve_parameters(config.model).items())
        lines = [
            ("model", f"{config.model.name.value}({params}), z0={config.model.z0:g}"),
            ("grid", f"{config.grid.mode.value}, {self._grid.n_steps} steps, T={self._grid.horizon:g}"),
            ("seed", str(config.seed)),
        ]
        if config.defaults_applied:
            lines.append(("defaults", ", ".join(config.defaults_applied)))
        self._view.render_header(config.subcommand.value, lines)

    def _simulate_run(self) -> RmRun:
        return simulate(self._model, self._grid, self._config.seed)

    def _simulate(self, result: DispatchResult) -> None:
        run = self._simulate_run()
        result.artifacts.append(self._write_path(run))
        if run.diverged:
            self._view.render_error(f"run diverged at step {run.divergence}")
        else:
            self._view.render_done(f"z_T = {run.z.final:.6g}")

    def _write_path(self, run: RmRun) -> Path:
        grid = run.grid
        pad = lambda steps: np.concatenate(([0.0], steps))
        return write_columns(self._out / "path.csv", self._header, {
            "time": grid.times,
            "K": grid.K,
            "z": run.z.values,
            "dm": pad(run.noise.dm),
            "d_qc": pad(run.noise.d_qc),
        })

    def _decompose(self, result: DispatchResult) -> None:
        run = self._simulate_run()
        d = asymptotic_decomposition(run)
        standard = decompose_z_squared(run, Representation.STANDARD)
        nonstandard = decompose_z_squared(run, Representation.NONSTANDARD)

        columns = {
            "time": run.grid.times,
            "z": run.z.values,
            "gamma": d.gamma.values,
            "martingale": d.martingale.values,
            "bracket": d.bracket.values,
            "chi": d.chi.values,
            "remainder": d.remainder.values,
            "remainder_excision": d.remainder_parts[0].values,
            "remainder_gain": d.remainder_parts[1].values,
            "remainder_noise": d.remainder_parts[2].values,
            "discretization": d.discretization.values,
            "residual": d.residual.values,
            "A1_standard": standard.A1.values,
            "A2_standard": standard.A2.values,
            "A1_nonstandard": nonstandard.A1.values,
            "A2_nonstandard": nonstandard.A2.values,
            "A1_bound_standard": standard.A1_bound.values,
            "A1_bound_nonstandard": nonstandard.A1_bound.values,
        }
        result.artifacts.append(write_columns(self._out / "decomposition.csv", self._header, columns))
        self._view.render_done(
            f"χz = L/⟨L⟩^(1/2) + R reconstructed to {d.reconstruction_error():.3e}; "
            f"R_T = {d.remainder.final:.6g}"
        )

    def _averaging(self, run: RmRun, d: Decomposition) -> AveragingResult:
        section = self._config.average
        if section.weight == WeightKind.PLAIN_K:
            return plain_average(run.z)
        if section.weight == WeightKind.ALPHA_WEIGHT:
            return alpha_average(run.z, d, section.alpha)
        g = np.asarray(run.model.weight_g(self._grid.steps), dtype=float)
        return polyak_average(run.z, g, self._grid)

    def _average(self, result: DispatchResult) -> None:
        run = self._simulate_run()
        d = asymptotic_decomposition(run)
        averaged = self._averaging(run, d)
        identity = b_tilde_identity(d, averaged.eps)

        columns = {
            "time": run.grid.times,
            "z": run.z.values,
            "zbar": averaged.zbar.values,
            "eps": averaged.eps.values,
            "B": identity.B,
            "B_tilde": identity.B_tilde,
            "B_tilde_double_integral": identity.double_integral + identity.correction,
            "eps2_over_B_tilde": b_tilde_ratio(identity, averaged.eps),
        }
        result.artifacts.append(write_columns(self._out / "averaging.csv", self._header, columns))
        self._view.render_done(
            f"zbar_T = {averaged.zbar.final:.6g} ({averaged.weight_kind.value}); "
            f"B̃ identity gap {identity.relative_gap:.3e}"
        )

    def _verify_reports(self, run: RmRun) -> List[ConditionReport]:
        config = self._config
        thresholds = config.diagnostics()
        spec = run.model
        v = config.verify
        delta0 = spec.delta0 if v.delta0 is None else v.delta0
        epsilon = 0.5 - delta0 / 4.0 if v.epsilon is None else v.epsilon

        positive = np.geomspace(v.u_min, v.u_max, thresholds.u_points)
        u_values = np.concatenate((-positive[::-1], positive))

        steps = sample_steps(self._grid)
        if run.diverged:
            steps = steps[steps < run.divergence]
        reports = [check_drift_sign(spec, u_values, steps if steps.size else np.array([1])),
                   check_group_B(spec, run, thresholds)]
        group_I = check_group_I(spec, run, thresholds)
        group_II = check_group_II(spec, run, thresholds)
        s1_s2 = check_S1_S2(spec, u_values, self._grid, thresholds=thresholds)
        reports += group_I + group_II + s1_s2
        reports += audit_implications(s1=s1_s2, group_I=group_I, group_II=group_II)
        if v.delta is None:
            _, rate_reports = scan_rate_conditions(spec, run, delta0, thresholds)
        else:
            rate_reports = check_rate_conditions(spec, run, v.delta, delta0, thresholds)
        reports += rate_reports

        if run.diverged:
            reports += self._expansion_unavailable(run.divergence, "divergence", f"path ends at step {run.divergence}")
            return reports

        d = asymptotic_decomposition(run)
        if d.gamma.diverged or d.bracket.diverged:
            step = d.gamma.divergence if d.gamma.diverged else d.bracket.divergence
            reports += self._expansion_unavailable(step, "overflow", "Γ or ⟨L⟩ overflowed")
        else:
            reports += check_expansion_conditions(run, d, epsilon, delta0)
        return reports

    def _expansion_unavailable(self, step: int, basis: str, note: str) -> List[ConditionReport]:
        return [ConditionReport(cid, Verdict.INCONCLUSIVE, witness_step=step, horizon=self._grid.horizon,
                                basis=basis, note=note)
                for cid in (ConditionId.EXPANSION_D, ConditionId.EXPANSION_E,
                            ConditionId.EXPANSION_F, ConditionId.EXPANSION_G)]

    def _verify(self, result: DispatchResult) -> None:
        run = self._simulate_run()
        reports = self._verify_reports(run)
        result.reports = reports
        result.artifacts.append(
            write_csv(self._out / "conditions.csv", self._header, CSV_COLUMNS, (r.to_row() for r in reports))
        )
        self._view.render_conditions(reports)

    def _mc(self, result: DispatchResult) -> None:
        config = self._config.mc_config()
        with self._view.progress("Replications", config.replications) as advance:
            summary = run_replications(config, threads=self._threads, progress=advance)
        result.summary = summary

        rows = (
            {
                "statistic": row.label,
                "mean": row.mean,
                "variance": row.variance,
                "predicted": row.predicted,
                "ks": row.ks,
                "n": row.n,
                "divergent": row.divergent,
                "time": row.time,
                "abs_q90": row.abs_q90,
            }
            for row in summary.rows
        )
        result.artifacts.append(write_csv(self._out / "mc_summary.csv", self._header, MC_COLUMNS, rows))
        self._view.render_mc_summary(summary)


def dispatch(config: RunConfig, view: Optional[ReportView] = None, threads: Optional[int] = None) -> DispatchResult:
    return Dispatcher(config, view, threads).run()
