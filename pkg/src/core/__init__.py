from src.core.errors import (
    LabError,
    GridMismatchError,
    ValidationError,
    ZeroFactorError,
    EvaluatorError,
    ConfigError,
    AllDivergentError,
)
from src.core.grid import TimeGrid, SamplePath, IncrementStream, find_divergence
from src.core.calculus import (
    step_integral,
    stochastic_integral,
    dolean_exponential,
    inverse_exponential,
    log_weight_process,
)
from src.core.rng import stream, streams, validate_seed

__all__ = [
    "LabError",
    "GridMismatchError",
    "ValidationError",
    "ZeroFactorError",
    "EvaluatorError",
    "ConfigError",
    "AllDivergentError",
    "TimeGrid",
    "SamplePath",
    "IncrementStream",
    "find_divergence",
    "step_integral",
    "stochastic_integral",
    "dolean_exponential",
    "inverse_exponential",
    "log_weight_process",
    "stream",
    "streams",
    "validate_seed",
]
