import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from src.config import settings
from src.core.errors import GridMismatchError, ValidationError

logger = logging.getLogger(__name__)


def _frozen(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Shared clock: time points, increments of K and the atom flags of K."""

    times: np.ndarray
    dK: np.ndarray
    jump_flag: np.ndarray

    def __post_init__(self):
        times = _frozen(self.times)
        dK = _frozen(self.dK)
        jump_flag = _frozen(self.jump_flag, dtype=bool)

        if times.ndim != 1 or times.size < 2:
            raise ValidationError("grid needs at least two time points")
        if dK.shape != (times.size - 1,) or jump_flag.shape != dK.shape:
            raise GridMismatchError(
                f"grid has {times.size} points but {dK.size} increments and {jump_flag.size} flags"
            )
        if not np.all(np.diff(times) > 0):
            raise ValidationError("times must be strictly increasing")
        if not np.all(np.isfinite(dK)) or np.any(dK < 0):
            raise ValidationError("dK entries must be finite and >= 0")

        object.__setattr__(self, "times", times)
        object.__setattr__(self, "dK", dK)
        object.__setattr__(self, "jump_flag", jump_flag)

    @classmethod
    def continuous(cls, horizon: float, dt: float) -> "TimeGrid":
        if horizon <= 0 or dt <= 0:
            raise ValidationError("continuous grid requires T > 0 and dt > 0")
        n_steps = max(1, int(round(horizon / dt)))
        times = np.linspace(0.0, float(horizon), n_steps + 1)
        return cls(times=times, dK=np.diff(times), jump_flag=np.zeros(n_steps, dtype=bool))

    @classmethod
    def discrete(cls, n_steps: int) -> "TimeGrid":
        if n_steps < 1:
            raise ValidationError("discrete grid requires steps >= 1")
        times = np.arange(n_steps + 1, dtype=float)
        return cls(times=times, dK=np.ones(n_steps), jump_flag=np.ones(n_steps, dtype=bool))

    @classmethod
    def from_clock(cls, times, K, jump_flag=None) -> "TimeGrid":
        K = np.asarray(K, dtype=float)
        if K.shape != np.shape(times):
            raise GridMismatchError("K must be sampled at every time point")
        if jump_flag is None:
            jump_flag = np.zeros(K.size - 1, dtype=bool)
        return cls(times=times, dK=np.diff(K), jump_flag=jump_flag)

    @property
    def n_steps(self) -> int:
        return self.dK.size

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @cached_property
    def K(self) -> np.ndarray:
        return _frozen(np.concatenate(([0.0], np.cumsum(self.dK))))

    @property
    def K_left(self) -> np.ndarray:
        return self.K[:-1]

    @property
    def is_discrete(self) -> bool:
        return bool(np.all(self.jump_flag)) and bool(np.all(self.dK == 1.0))

    @property
    def has_jumps(self) -> bool:
        return bool(np.any(self.jump_flag))

    @property
    def steps(self) -> np.ndarray:
        return np.arange(1, self.n_steps + 1)

    def index_at(self, time: float) -> int:
        index = int(np.searchsorted(self.times, time, side="right")) - 1
        return min(max(index, 0), self.n_steps)

    def decade_bounds(self) -> Tuple[int, int, int]:
        """Indices of T/100, T/10 and T measured on the time axis."""
        t0 = self.times[0]
        span = self.horizon - t0
        return (
            self.index_at(t0 + span / 100.0),
            self.index_at(t0 + span / 10.0),
            self.n_steps,
        )

    def prefix(self, n_steps: int) -> "TimeGrid":
        """The first n_steps steps of this grid."""
        if not 1 <= n_steps <= self.n_steps:
            raise ValidationError(f"prefix needs 1 <= steps <= {self.n_steps}, got {n_steps}")
        if n_steps == self.n_steps:
            return self
        return TimeGrid(self.times[:n_steps + 1], self.dK[:n_steps], self.jump_flag[:n_steps])

    def same_as(self, other: "TimeGrid") -> bool:
        if self is other:
            return True
        return (
            self.times.shape == other.times.shape
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.dK, other.dK)
            and np.array_equal(self.jump_flag, other.jump_flag)
        )

    def require_same(self, other: "TimeGrid", what: str = "path") -> None:
        if not self.same_as(other):
            raise GridMismatchError(f"{what} lives on a different grid")


def find_divergence(values: np.ndarray, guard: Optional[float] = None) -> Optional[int]:
    guard = settings.numerics.overflow_guard if guard is None else guard
    with np.errstate(invalid="ignore"):
        bad = ~np.isfinite(values) | (np.abs(values) > guard)
    if not bad.any():
        return None
    return int(np.argmax(bad))


@dataclass(frozen=True, eq=False)
class SamplePath:
    grid: TimeGrid
    values: np.ndarray
    divergence: Optional[int] = None

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != self.grid.times.shape:
            raise GridMismatchError(
                f"path has {values.size} values, grid has {self.grid.times.size} points"
            )
        checked = values if self.divergence is None else values[: self.divergence]
        if not np.all(np.isfinite(checked)):
            raise ValidationError("non-finite path values without a divergence marker")
        object.__setattr__(self, "values", values)

    @classmethod
    def guarded(cls, grid: TimeGrid, values, guard: Optional[float] = None) -> "SamplePath":
        values = np.asarray(values, dtype=float)
        divergence = find_divergence(values, guard)
        if divergence is not None:
            logger.warning(f"Path diverged at step {divergence}")
        return cls(grid=grid, values=values, divergence=divergence)

    @property
    def diverged(self) -> bool:
        return self.divergence is not None

    @property
    def final(self) -> float:
        return float(self.values[-1])

    def at(self, index: int) -> float:
        return float(self.values[index])

    def at_time(self, time: float) -> float:
        return float(self.values[self.grid.index_at(time)])

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class IncrementStream:
    dm: np.ndarray
    d_qc: np.ndarray

    def __post_init__(self):
        dm = _frozen(self.dm)
        d_qc = _frozen(self.d_qc)
        if dm.shape != d_qc.shape:
            raise GridMismatchError("dm and d_qc must have one entry per step")
        if np.any(d_qc < 0):
            raise ValidationError("quadratic-characteristic increments must be >= 0")
        object.__setattr__(self, "dm", dm)
        object.__setattr__(self, "d_qc", d_qc)

    @property
    def n_steps(self) -> int:
        return self.dm.shape[-1]

    def check_grid(self, grid: TimeGrid) -> None:
        if self.n_steps != grid.n_steps:
            raise GridMismatchError(f"stream has {self.n_steps} steps, grid has {grid.n_steps}")
