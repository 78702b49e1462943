import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from src.config import settings
from src.core.calculus import step_integral
from src.core.grid import SamplePath, TimeGrid
from src.engine.simulator import RmRun

logger = logging.getLogger(__name__)

STEP_CHUNK = 2048


class Representation(str, Enum):
    STANDARD = "standard"
    NONSTANDARD = "nonstandard"


@dataclass(frozen=True, eq=False)
class ZSquaredDecomposition:
    A1: SamplePath
    A2: SamplePath
    representation: Representation
    mart_residual: SamplePath
    # Σ sup_u dA1(u)/(1+u²): the growth of A1's coefficient, independent of where z sits
    A1_bound: SamplePath

    @property
    def drift(self) -> np.ndarray:
        return self.A1.values - self.A2.values


def drift_terms(model, grid, states) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-step V⁻ = 2H(u)u, V⁺ = H²(u)ΔK (jump steps only) and d⟨M̃⟩/dK = h(u, u)."""
    i = grid.steps
    drift = np.asarray(model.drift_field(i, states), dtype=float)
    v_minus = 2.0 * drift * states
    v_plus = np.where(grid.jump_flag, drift * drift * grid.dK, 0.0)
    qc = np.asarray(model.qc_density(i, states, states), dtype=float)
    return v_minus, v_plus, qc


def _increments(v_minus, v_plus, qc, dK, jump, representation: Representation):
    if representation == Representation.STANDARD:
        dA1 = np.where(jump, v_plus * dK, 0.0) + qc * dK
        dA2 = -v_minus * dK
        return dA1, dA2
    mixed = np.where(jump, v_minus + v_plus, 0.0)
    continuous = np.where(jump, 0.0, v_minus)
    dA1 = (np.maximum(mixed, 0.0) + np.maximum(continuous, 0.0) + qc) * dK
    dA2 = (np.maximum(-continuous, 0.0) + np.maximum(-mixed, 0.0)) * dK
    return dA1, dA2


def coefficient_bound(model, grid: TimeGrid, representation=Representation.STANDARD,
                      u_values: Optional[np.ndarray] = None) -> np.ndarray:
    """Partial sums of sup_u dA1(u)/(1+u²) over a state grid."""
    representation = Representation(representation)
    if u_values is None:
        positive = np.geomspace(min(settings.diagnostics.eps_values), 1.0 / min(settings.diagnostics.eps_values),
                                settings.diagnostics.u_points)
        u_values = np.concatenate((-positive[::-1], positive))
    u = np.asarray(u_values, dtype=float)[None, :]

    per_step = np.empty(grid.n_steps)
    for start in range(0, grid.n_steps, STEP_CHUNK):
        stop = min(grid.n_steps, start + STEP_CHUNK)
        i = grid.steps[start:stop][:, None]
        dK = grid.dK[start:stop][:, None]
        jump = grid.jump_flag[start:stop][:, None]
        with np.errstate(invalid="ignore", over="ignore"):
            drift = np.asarray(model.drift_field(i, u), dtype=float)
            v_minus = 2.0 * drift * u
            v_plus = np.where(jump, drift * drift * dK, 0.0)
            qc = np.asarray(model.qc_density(i, u, u), dtype=float)
            dA1, _ = _increments(v_minus, v_plus, qc, dK, jump, representation)
        per_step[start:stop] = np.max(np.broadcast_to(dA1 / (1.0 + u * u), (stop - start, u.size)), axis=1)
    return np.concatenate(([0.0], np.cumsum(per_step)))


def decompose_z_squared(run: RmRun, representation=Representation.STANDARD) -> ZSquaredDecomposition:
    run.require_complete()
    representation = Representation(representation)
    grid = run.grid
    v_minus, v_plus, qc = drift_terms(run.model, grid, run.left_states())

    if representation == Representation.NONSTANDARD:
        uphill = ~grid.jump_flag & (v_minus > 0.0)
        if uphill.any():
            # A1 − A2 still matches the standard split; A1 absorbs the positive part
            logger.warning(
                f"H(u)u > 0 on {int(uphill.sum())} continuous step(s), first at step {int(np.argmax(uphill)) + 1}"
            )
    dA1, dA2 = _increments(v_minus, v_plus, qc, grid.dK, grid.jump_flag, representation)

    A1 = step_integral(np.ones_like(dA1), dA1)
    A2 = step_integral(np.ones_like(dA2), dA2)
    z = run.z.values
    residual = z * z - z[0] ** 2 - A1 + A2

    return ZSquaredDecomposition(
        A1=SamplePath(grid=grid, values=A1),
        A2=SamplePath(grid=grid, values=A2),
        representation=representation,
        mart_residual=SamplePath(grid=grid, values=residual),
        A1_bound=SamplePath(grid=grid, values=coefficient_bound(run.model, grid, representation)),
    )
