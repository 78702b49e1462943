import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.core.errors import ValidationError
from src.core.grid import IncrementStream, SamplePath, TimeGrid
from src.core.rng import stream, validate_seed
from src.engine.stepper import EulerStepper, PathRecorder
from src.models.spec import ModelSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RmRun:
    z: SamplePath
    noise: IncrementStream
    model: ModelSpec
    seed: int
    stream_index: Optional[int] = None

    @property
    def grid(self) -> TimeGrid:
        return self.z.grid

    @property
    def divergence(self) -> Optional[int]:
        return self.z.divergence

    @property
    def diverged(self) -> bool:
        return self.z.divergence is not None

    def left_states(self) -> np.ndarray:
        return self.z.values[:-1]

    def recursion_residual(self) -> float:
        """Largest violation of the stored recursion, re-evaluated from the stored noise."""
        grid = self.grid
        stop = grid.n_steps if self.divergence is None else self.divergence - 1
        i = grid.steps[:stop]
        u = self.z.values[:stop]
        rebuilt = (
            u
            + self.model.drift_field(i, u) * grid.dK[:stop]
            + self.model.noise_coeff_field(i, u) * self.noise.dm[:stop]
        )
        if stop == 0:
            return 0.0
        return float(np.max(np.abs(rebuilt - self.z.values[1:stop + 1])))

    def require_complete(self) -> None:
        if self.diverged:
            raise ValidationError(f"run diverged at step {self.divergence}")


def _collect(model, grid, seed, indices, generators) -> List[RmRun]:
    recorder = PathRecorder(len(generators), grid, model.z0)
    result = EulerStepper(model, grid, generators).run([recorder])

    runs = []
    for k, index in enumerate(indices):
        divergence = int(result.divergence[k]) if result.divergence[k] >= 0 else None
        runs.append(
            RmRun(
                z=SamplePath(grid=grid, values=recorder.z[k], divergence=divergence),
                noise=IncrementStream(dm=recorder.dm[k], d_qc=recorder.d_qc[k]),
                model=result.model.for_replication(k),
                seed=seed,
                stream_index=index,
            )
        )
    return runs


def simulate(model: ModelSpec, grid: TimeGrid, seed: int, stream_index: Optional[int] = None) -> RmRun:
    seed = validate_seed(seed)
    run = _collect(model, grid, seed, [stream_index], [stream(seed, stream_index)])[0]
    logger.info(
        f"Simulated {model.name.value} over {grid.n_steps} steps (seed={seed}, z_T={run.z.final:.6g})"
    )
    return run


def simulate_many(model: ModelSpec, grid: TimeGrid, master_seed: int, replications: int) -> List[RmRun]:
    """Replication k equals simulate(model, grid, master_seed, stream_index=k)."""
    master_seed = validate_seed(master_seed)
    if replications < 1:
        raise ValidationError("replications must be >= 1")
    indices = list(range(replications))
    generators = [stream(master_seed, index) for index in indices]
    return _collect(model, grid, master_seed, indices, generators)


def noiseless_run(model: ModelSpec, grid: TimeGrid) -> RmRun:
    """Euler path of a linear model with ℓ ≡ 0 in product form, z_i = z_0 Π(1 − β_jΔK_j)."""
    grid.require_same(model.grid, "model")
    if not model.linear:
        raise ValidationError("noiseless_run needs a linear model")
    steps = grid.steps
    coeff = np.asarray(model.noise_coeff_field(steps, np.zeros(grid.n_steps)), dtype=float)
    if np.any(coeff != 0.0):
        raise ValidationError("noiseless_run needs ℓ ≡ 0")

    factors = 1.0 - np.asarray(model.beta(steps), dtype=float) * grid.dK
    with np.errstate(over="ignore", under="ignore"):
        values = model.z0 * np.concatenate(([1.0], np.cumprod(factors)))
    return RmRun(
        z=SamplePath.guarded(grid, values),
        noise=IncrementStream(dm=np.zeros(grid.n_steps), d_qc=np.array(grid.dK)),
        model=model,
        seed=0,
    )
