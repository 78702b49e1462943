import logging
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import numpy as np

from src.config import settings
from src.core.errors import EvaluatorError
from src.core.grid import TimeGrid
from src.models.spec import ModelSpec

logger = logging.getLogger(__name__)


class StepObserver(Protocol):
    def start(self, model: ModelSpec, n_reps: int) -> None:
        ...

    def observe(self, i: int, u: np.ndarray, z: np.ndarray, dm: np.ndarray,
                d_qc: np.ndarray, active: np.ndarray) -> None:
        ...


@dataclass
class BlockResult:
    model: ModelSpec
    z_final: np.ndarray
    divergence: np.ndarray

    @property
    def divergent_count(self) -> int:
        return int(np.count_nonzero(self.divergence >= 0))


class PathRecorder:
    def __init__(self, n_reps: int, grid: TimeGrid, z0: float):
        self.z = np.empty((n_reps, grid.n_steps + 1))
        self.z[:, 0] = z0
        self.dm = np.empty((n_reps, grid.n_steps))
        self.d_qc = np.empty((n_reps, grid.n_steps))

    def start(self, model, n_reps):
        pass

    def observe(self, i, u, z, dm, d_qc, active):
        self.z[:, i] = z
        self.dm[:, i - 1] = dm
        self.d_qc[:, i - 1] = d_qc


class EulerStepper:
    """Left-point Euler scheme for z_i = z_{i-1} + H(i, z_{i-1})ΔK_i + ℓ(i, z_{i-1})·dm_i,
    vectorized over a block of replications."""

    def __init__(self, model: ModelSpec, grid: TimeGrid, generators: Sequence[np.random.Generator],
                 guard: Optional[float] = None, chunk: Optional[int] = None):
        grid.require_same(model.grid, "model")
        self._model = model
        self._grid = grid
        self._generators = list(generators)
        self._guard = settings.numerics.overflow_guard if guard is None else guard
        self._chunk = chunk or settings.numerics.noise_chunk

    def run(self, observers: Sequence[StepObserver] = ()) -> BlockResult:
        grid = self._grid
        realization = self._model.noise.realize(self._model, grid, self._generators)
        spec = realization.model
        stops = realization.stops

        n_reps = len(self._generators)
        z = np.full(n_reps, spec.z0, dtype=float)
        divergence = np.full(n_reps, -1, dtype=np.int64)
        active = np.ones(n_reps, dtype=bool)
        dK = grid.dK
        for observer in observers:
            observer.start(spec, n_reps)

        with np.errstate(over="ignore", invalid="ignore"):
            for start in range(0, grid.n_steps, self._chunk):
                stop = min(grid.n_steps, start + self._chunk)
                dm_block, qc_block = realization.increments(start, stop)

                for j in range(stop - start):
                    i = start + j + 1
                    dm = dm_block[:, j]
                    if stops is not None:
                        ended = active & (stops == i)
                        if ended.any():
                            divergence[ended] = i
                            active = active & ~ended
                            logger.warning(f"{int(ended.sum())} replication(s) ran out of noise at step {i}")
                    drift = spec.drift_field(i, z)
                    coeff = spec.noise_coeff_field(i, z)
                    self._check(i, z, drift, coeff, active)

                    z_next = z + drift * dK[i - 1] + coeff * dm

                    escaped = active & (~np.isfinite(z_next) | (np.abs(z_next) > self._guard))
                    if escaped.any():
                        divergence[escaped] = i
                        active = active & ~escaped
                        logger.warning(f"{int(escaped.sum())} replication(s) diverged at step {i}")
                    z_next = np.where(active, z_next, np.nan)

                    for observer in observers:
                        observer.observe(i, z, z_next, dm, qc_block[:, j], active)
                    z = z_next

        return BlockResult(model=spec, z_final=z, divergence=divergence)

    @staticmethod
    def _check(i, z, drift, coeff, active) -> None:
        bad = active & ~(np.isfinite(drift) & np.isfinite(coeff))
        if bad.any():
            k = int(np.argmax(bad))
            raise EvaluatorError(i, float(z[k]), "model evaluator returned a non-finite value")
