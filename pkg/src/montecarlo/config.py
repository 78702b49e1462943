from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

from src.asymptotics.averaging import WeightKind
from src.asymptotics.predictions import Statistic
from src.core.errors import ValidationError
from src.core.grid import TimeGrid
from src.core.rng import validate_seed
from src.models.spec import ModelId


class GridMode(str, Enum):
    CONTINUOUS = "continuous"
    DISCRETE = "discrete"


@dataclass(frozen=True)
class GridSpec:
    mode: GridMode = GridMode.CONTINUOUS
    horizon: Optional[float] = None
    dt: Optional[float] = None
    steps: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", GridMode(self.mode))

    def validate(self) -> None:
        if self.mode == GridMode.CONTINUOUS:
            if self.horizon is None or self.dt is None:
                raise ValidationError("continuous grid requires T and dt")
            if not (self.horizon > 0 and self.dt > 0):
                raise ValidationError("continuous grid requires T > 0 and dt > 0")
            if self.steps is not None:
                raise ValidationError("continuous grid takes dt, not steps")
        else:
            if self.steps is None or self.steps < 1:
                raise ValidationError("discrete grid requires steps >= 1")
            if self.dt is not None or self.horizon is not None:
                raise ValidationError("discrete grid takes steps, not T or dt")

    def build(self) -> TimeGrid:
        self.validate()
        if self.mode == GridMode.CONTINUOUS:
            return TimeGrid.continuous(self.horizon, self.dt)
        return TimeGrid.discrete(self.steps)


@dataclass(frozen=True)
class StatisticSpec:
    statistic: Statistic
    delta: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "statistic", Statistic(self.statistic))
        if self.statistic == Statistic.RATE_MONITOR:
            if self.delta is None:
                raise ValidationError("rate_monitor requires δ")
            object.__setattr__(self, "delta", float(self.delta))
        elif self.delta is not None:
            raise ValidationError(f"{self.statistic.value} takes no δ")

    @property
    def label(self) -> str:
        if self.statistic == Statistic.RATE_MONITOR:
            return f"rate_monitor({self.delta!r})"
        return self.statistic.value

    @classmethod
    def parse(cls, text: str) -> "StatisticSpec":
        text = text.strip()
        if text.startswith("rate_monitor(") and text.endswith(")"):
            try:
                delta = float(text[len("rate_monitor("):-1])
            except ValueError:
                raise ValidationError(f"bad δ in {text!r}") from None
            return cls(Statistic.RATE_MONITOR, delta)
        try:
            return cls(Statistic(text))
        except ValueError:
            raise ValidationError(f"unknown statistic {text!r}") from None


DEFAULT_STATISTICS = (
    StatisticSpec(Statistic.Z_TERMINAL),
    StatisticSpec(Statistic.ZBAR_TERMINAL),
)


@dataclass(frozen=True)
class McConfig:
    model: ModelId
    grid: GridSpec
    replications: int
    master_seed: int
    statistics: Tuple[StatisticSpec, ...] = DEFAULT_STATISTICS
    weight_kind: WeightKind = WeightKind.ALPHA_WEIGHT
    alpha: float = 1.0
    checkpoints: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "weight_kind", WeightKind(self.weight_kind))
        object.__setattr__(self, "statistics", tuple(self.statistics))
        object.__setattr__(self, "checkpoints", tuple(float(c) for c in self.checkpoints))

    def validate(self) -> None:
        if self.replications < 2:
            raise ValidationError("replications must be >= 2")
        validate_seed(self.master_seed)
        self.grid.validate()
        if not self.statistics:
            raise ValidationError("at least one statistic is required")
        if self.alpha < 0:
            raise ValidationError("α must be >= 0")
        if any(c <= 0 for c in self.checkpoints):
            raise ValidationError("checkpoint times must be > 0")
