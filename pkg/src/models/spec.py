import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Callable, Dict, Optional, Tuple

import numpy as np

from src.core.grid import TimeGrid

if TYPE_CHECKING:
    from src.models.noise import NoiseDriver

logger = logging.getLogger(__name__)

StepField = Callable[[object, object], np.ndarray]
PairField = Callable[[object, object, object], np.ndarray]
StepProcess = Callable[[object], np.ndarray]


class ModelName(str, Enum):
    LINEAR_STANDARD = "linear_standard"
    LINEAR_SLOW_GAIN = "linear_slow_gain"
    RM_SLOW_GAIN = "rm_slow_gain"
    GALTON_WATSON = "galton_watson"
    DETERMINISTIC_REGRESSION = "deterministic_regression"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ModelId:
    name: ModelName
    parameters: Tuple[Tuple[str, float], ...] = ()
    z0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "name", ModelName(self.name))
        items = dict(self.parameters)
        object.__setattr__(
            self, "parameters", tuple(sorted((str(k), float(v)) for k, v in items.items()))
        )
        object.__setattr__(self, "z0", float(self.z0))

    @classmethod
    def of(cls, name, z0: float = 0.0, **parameters: float) -> "ModelId":
        return cls(name=ModelName(name), parameters=tuple(parameters.items()), z0=z0)

    def as_dict(self) -> Dict[str, float]:
        return dict(self.parameters)

    def get(self, key: str, default: Optional[float] = None) -> Optional[float]:
        return self.as_dict().get(key, default)

    def with_parameters(self, **updates: float) -> "ModelId":
        merged = self.as_dict()
        merged.update(updates)
        return replace(self, parameters=tuple(merged.items()))


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """An RM model bound to a grid.

    Every evaluator takes the grid step ``i`` (1..N, the state is the value at the
    left endpoint of the step) and is vectorized in both ``i`` and the state.
    ``gamma`` is indexed by grid point (0..N).
    """

    model_id: ModelId
    grid: TimeGrid
    drift_field: StepField
    noise_coeff_field: StepField
    qc_density: PairField
    beta: StepProcess
    beta_field: StepField
    gamma: StepProcess
    weight_g: StepProcess
    z0: float
    noise: "NoiseDriver"
    delta0: float = 1.0
    linear: bool = False
    deterministic_gains: bool = True
    expansion_guaranteed: bool = True
    observations: Optional[np.ndarray] = None
    bind_observations: Optional[Callable[[np.ndarray], "ModelSpec"]] = None

    @property
    def name(self) -> ModelName:
        return self.model_id.name

    @property
    def needs_realization(self) -> bool:
        return self.bind_observations is not None and self.observations is None

    def gamma_path(self) -> np.ndarray:
        return np.asarray(self.gamma(np.arange(self.grid.n_steps + 1)), dtype=float)

    def gamma_density(self) -> np.ndarray:
        gamma = self.gamma_path()
        dK = self.grid.dK
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(dK > 0, np.diff(gamma) / np.where(dK > 0, dK, 1.0), 0.0)

    def for_replication(self, index: int) -> "ModelSpec":
        if self.observations is None or self.observations.ndim == 1:
            return self
        return self.bind_observations(self.observations[index])


def like(value, u) -> np.ndarray:
    """Broadcast a step quantity against the state shape."""
    return np.asarray(value, dtype=float) + np.zeros_like(np.asarray(u, dtype=float))


def ratio_field(drift_field: StepField, beta: StepProcess) -> StepField:
    """β_t(u) = −H_t(u)/u with the u = 0 value taken from β_t."""

    def beta_field(i, u):
        u = np.asarray(u, dtype=float)
        h = np.asarray(drift_field(i, u), dtype=float)
        safe = np.where(u == 0.0, 1.0, u)
        with np.errstate(invalid="ignore"):
            return np.where(u == 0.0, like(beta(i), u), -h / safe)

    return beta_field
