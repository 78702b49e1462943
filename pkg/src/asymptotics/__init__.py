from src.asymptotics.normalization import Decomposition, asymptotic_decomposition, check_expansion_conditions
from src.asymptotics.averaging import (
    AveragingResult,
    WeightKind,
    alpha_average,
    alpha_weight,
    average_with_weights,
    b_tilde_identity,
    b_tilde_ratio,
    kronecker_ratio,
    kronecker_series,
    plain_average,
    polyak_average,
    toeplitz_average,
)
from src.asymptotics.predictions import Prediction, Statistic, normalizer_exponent, predicted_variance
from src.asymptotics.online import OnlineDecomposition

__all__ = [
    "Decomposition",
    "asymptotic_decomposition",
    "check_expansion_conditions",
    "AveragingResult",
    "WeightKind",
    "alpha_average",
    "alpha_weight",
    "average_with_weights",
    "b_tilde_identity",
    "b_tilde_ratio",
    "kronecker_ratio",
    "kronecker_series",
    "plain_average",
    "polyak_average",
    "toeplitz_average",
    "Prediction",
    "Statistic",
    "normalizer_exponent",
    "predicted_variance",
    "OnlineDecomposition",
]
