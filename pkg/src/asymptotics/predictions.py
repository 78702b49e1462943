from dataclasses import dataclass
from enum import Enum
from typing import Optional

from src.models.registry import resolve_parameters
from src.models.spec import ModelId, ModelName


class Statistic(str, Enum):
    Z_TERMINAL = "z_terminal"
    ZBAR_TERMINAL = "zbar_terminal"
    CHI_Z = "chi_z"
    ZBAR_EPS = "zbar_eps"
    RATE_MONITOR = "rate_monitor"
    REMAINDER_R = "remainder_R"


@dataclass(frozen=True)
class Prediction:
    statistic: Statistic
    normalizer: str
    variance: Optional[float] = None
    exponent: Optional[float] = None
    note: str = ""

    @property
    def available(self) -> bool:
        return self.variance is not None


# The slow-gain remainder is known to vanish for r > 4/5; the averaged limit needs r > 5/6.
R_MIN_TERMINAL = 0.8
R_MIN_AVERAGED = 5.0 / 6.0

SLOW_GAIN_MODELS = (ModelName.LINEAR_SLOW_GAIN, ModelName.RM_SLOW_GAIN)
PREDICTED_MODELS = (ModelName.LINEAR_STANDARD,) + SLOW_GAIN_MODELS


def normalizer_exponent(model_id: ModelId, statistic) -> Optional[float]:
    """Power of (1 + K_T) multiplying z_T or zbar_T; None for self-normalized statistics."""
    statistic = Statistic(statistic)
    if statistic == Statistic.Z_TERMINAL:
        if model_id.name in SLOW_GAIN_MODELS:
            return resolve_parameters(model_id)["r"] / 2.0
        return 0.5
    if statistic == Statistic.ZBAR_TERMINAL:
        return 0.5
    return None


def _describe(statistic: Statistic, exponent: Optional[float]) -> str:
    if statistic == Statistic.CHI_Z:
        return "χ_T z_T"
    if statistic == Statistic.ZBAR_EPS:
        return "(ε^(1)_T)^(1/2) zbar_T"
    if statistic == Statistic.RATE_MONITOR:
        return "γ_T^δ z_T²"
    if statistic == Statistic.REMAINDER_R:
        return "R_T"
    target = "z_T" if statistic == Statistic.Z_TERMINAL else "zbar_T"
    return f"(1+K_T)^{exponent:g} {target}"


def predicted_variance(model_id: ModelId, statistic) -> Prediction:
    statistic = Statistic(statistic)
    name = model_id.name
    exponent = normalizer_exponent(model_id, statistic)
    normalizer = _describe(statistic, exponent)

    def no_prediction(note: str) -> Prediction:
        return Prediction(statistic, normalizer, exponent=exponent, note=note)

    if statistic == Statistic.RATE_MONITOR:
        return no_prediction("tends to 0; no Gaussian limit")
    if statistic == Statistic.REMAINDER_R:
        return no_prediction("tends to 0 in probability")
    if name not in PREDICTED_MODELS:
        return no_prediction(f"no closed-form limit for {name.value}")

    p = resolve_parameters(model_id)
    alpha, beta, sigma = p["alpha"], p["beta"], p["sigma"]

    if name == ModelName.RM_SLOW_GAIN:
        averaged = statistic in (Statistic.ZBAR_TERMINAL, Statistic.ZBAR_EPS)
        bound = R_MIN_AVERAGED if averaged else R_MIN_TERMINAL
        if p["r"] <= bound:
            return no_prediction(f"limit stated only for r > {bound:.4g}")

    if statistic == Statistic.CHI_Z:
        return Prediction(statistic, normalizer, 1.0)
    if statistic == Statistic.ZBAR_EPS:
        return Prediction(statistic, normalizer, 2.0)

    if name == ModelName.LINEAR_STANDARD:
        excess = 2.0 * alpha * beta - 1.0
        if statistic == Statistic.Z_TERMINAL:
            variance = alpha ** 2 * sigma ** 2 / excess
        else:
            variance = 2.0 * alpha * sigma ** 2 / (beta * excess)
        return Prediction(statistic, normalizer, variance, exponent)

    if statistic == Statistic.Z_TERMINAL:
        return Prediction(statistic, normalizer, alpha * sigma ** 2 / (2.0 * beta), exponent)
    return Prediction(statistic, normalizer, sigma ** 2 / beta ** 2, exponent)
