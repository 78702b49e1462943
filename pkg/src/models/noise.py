import logging
from abc import ABC, abstractmethod
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from src.core.grid import TimeGrid
from src.core.rng import gaussian_block

logger = logging.getLogger(__name__)


class Realization:
    """A model bound to a block of replications plus its sequential increment source."""

    def __init__(self, model, source: Callable[[int, int], Tuple[np.ndarray, np.ndarray]],
                 stops: Optional[np.ndarray] = None):
        self.model = model
        self._source = source
        self._cursor = 0
        # per replication, the first step the source cannot supply (-1: none)
        self.stops = stops

    def increments(self, start: int, stop: int) -> Tuple[np.ndarray, np.ndarray]:
        if start != self._cursor:
            raise RuntimeError(f"increments must be drawn in order (expected {self._cursor}, got {start})")
        self._cursor = stop
        return self._source(start, stop)


class NoiseDriver(ABC):
    @abstractmethod
    def realize(self, model, grid: TimeGrid, generators: Sequence[np.random.Generator]) -> Realization:
        ...


class GaussianNoise(NoiseDriver):
    """Continuous martingale m with d⟨m⟩ = dK, sampled as sqrt(ΔK)·N(0,1)."""

    def realize(self, model, grid, generators):
        dK = grid.dK
        root = np.sqrt(dK)
        n_reps = len(generators)

        def source(start, stop):
            shocks = gaussian_block(generators, stop - start)
            dm = shocks * root[start:stop]
            d_qc = np.broadcast_to(dK[start:stop], (n_reps, stop - start))
            return dm, d_qc

        return Realization(model, source)


class ObservationNoise(NoiseDriver):
    """Noise generated by an observed process drawn up front (Galton–Watson)."""

    def __init__(self, draw: Callable, innovations: Callable, exhausted: Optional[Callable] = None):
        self._draw = draw
        self._innovations = innovations
        self._exhausted = exhausted

    def realize(self, model, grid, generators):
        observations = np.stack([self._draw(grid.n_steps, g) for g in generators])
        bound = model.bind_observations(observations)

        def source(start, stop):
            return self._innovations(observations, start, stop)

        stops = None if self._exhausted is None else np.asarray(self._exhausted(observations))
        return Realization(bound, source, stops)
