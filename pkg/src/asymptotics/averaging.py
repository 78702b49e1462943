import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from src.core.calculus import log_weight_process, step_integral
from src.core.errors import ValidationError
from src.core.grid import SamplePath, TimeGrid
from src.asymptotics.normalization import Decomposition

logger = logging.getLogger(__name__)


class WeightKind(str, Enum):
    PLAIN_K = "plain_K"
    ALPHA_WEIGHT = "alpha_weight"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class AveragingResult:
    zbar: SamplePath
    eps: SamplePath
    weight_kind: WeightKind
    alpha: Optional[float] = None
    log_eps: Optional[np.ndarray] = None

    def weights(self, t_index: int) -> np.ndarray:
        """Weights of z_0..z_{t-1} in zbar_t, boundary term first."""
        eps = self.eps.values
        out = np.empty(t_index + 1)
        out[0] = eps[0] / eps[t_index]
        out[1:] = np.diff(eps[: t_index + 1]) / eps[t_index]
        return out


def _average_direct(z: np.ndarray, eps: np.ndarray) -> np.ndarray:
    numerator = z[0] * eps[0] + step_integral(z[:-1], np.diff(eps))
    return numerator / eps


def _average_log(z: np.ndarray, log_eps: np.ndarray) -> np.ndarray:
    """Same average with ε carried as log ε; positive and negative parts summed separately."""
    ratio = np.exp(log_eps[:-1] - log_eps[1:])
    with np.errstate(divide="ignore"):
        log_increment = log_eps[1:] + np.log1p(-ratio)
        log_abs = np.log(np.abs(z))

    def part(mask):
        terms = np.full(z.size, -np.inf)
        first = log_abs[0] + log_eps[0]
        terms[0] = first if mask[0] else -np.inf
        terms[1:] = np.where(mask[:-1], log_abs[:-1] + log_increment, -np.inf)
        return np.logaddexp.accumulate(terms)

    with np.errstate(over="ignore", invalid="ignore"):
        positive = np.exp(part(z > 0) - log_eps)
        negative = np.exp(part(z < 0) - log_eps)
    return positive - negative


def average_with_weights(z: SamplePath, eps, kind: WeightKind = WeightKind.CUSTOM,
                         alpha: Optional[float] = None) -> AveragingResult:
    """zbar_t = (ε_0 z_0 + Σ z_{s-}Δε_s)/ε_t for a nondecreasing positive weight path."""
    grid = z.grid
    eps = np.asarray(eps.values if isinstance(eps, SamplePath) else eps, dtype=float)
    if eps.shape != z.values.shape:
        raise ValidationError("weight path must live on the path's grid")
    if eps[0] <= 0 or np.any(np.diff(eps) < 0):
        raise ValidationError("weight path must be positive and nondecreasing")

    zbar = _average_direct(z.values, eps)
    return AveragingResult(
        zbar=SamplePath(grid=grid, values=zbar, divergence=z.divergence),
        eps=SamplePath(grid=grid, values=eps),
        weight_kind=WeightKind(kind),
        alpha=alpha,
    )


def plain_average(z: SamplePath) -> AveragingResult:
    """ε_t = 1 + K_t."""
    return average_with_weights(z, 1.0 + z.grid.K, WeightKind.PLAIN_K)


def polyak_average(z: SamplePath, weight_g, grid: TimeGrid) -> AveragingResult:
    """Weighted average with ε = ε(+g∘K) carried in log space."""
    grid.require_same(z.grid)
    g = np.asarray(weight_g, dtype=float)
    if np.any(g < 0):
        raise ValidationError("averaging weight g must be >= 0")

    log_eps = log_weight_process(g, grid)
    zbar = _average_log(z.values, log_eps)
    with np.errstate(over="ignore"):
        eps = np.exp(log_eps)
    return AveragingResult(
        zbar=SamplePath(grid=grid, values=zbar, divergence=z.divergence),
        eps=SamplePath.guarded(grid, eps, guard=np.inf),
        weight_kind=WeightKind.CUSTOM,
        log_eps=log_eps,
    )


def alpha_weight(decomposition: Decomposition, alpha_path) -> SamplePath:
    """ε^(α)_t = 1 + Σ α_s β_s Γ_s²/⟨L⟩_s ΔK_s."""
    grid = decomposition.grid
    alpha = np.asarray(alpha_path, dtype=float) + np.zeros(grid.n_steps)
    if np.any(alpha < 0):
        raise ValidationError("α must be >= 0")

    gamma = decomposition.gamma.values[1:]
    bracket = decomposition.bracket.values[1:]
    beta = decomposition.beta
    density = alpha * beta * gamma ** 2 / bracket
    eps = 1.0 + step_integral(density, grid.dK)
    logger.debug(f"ε^(α)_T = {eps[-1]:.6g}")
    return SamplePath(grid=grid, values=eps)


def alpha_average(z: SamplePath, decomposition: Decomposition, alpha: float = 1.0) -> AveragingResult:
    eps = alpha_weight(decomposition, alpha)
    return average_with_weights(z, eps, WeightKind.ALPHA_WEIGHT, alpha=alpha)


@dataclass(frozen=True, eq=False)
class BTildeIdentity:
    B: np.ndarray
    B_tilde: np.ndarray
    double_integral: np.ndarray
    correction: np.ndarray

    @property
    def relative_gap(self) -> float:
        rebuilt = self.double_integral + self.correction
        scale = np.maximum(1.0, np.abs(self.B_tilde))
        return float(np.max(np.abs(rebuilt - self.B_tilde) / scale))

    @property
    def correction_share(self) -> float:
        final = self.B_tilde[-1]
        return float(abs(self.correction[-1]) / final) if final else 0.0


def b_tilde_identity(decomposition: Decomposition, eps) -> BTildeIdentity:
    """B_t = ∫Γ^{-1}dε and B̃_t = ∫(B_t − B_s)²d⟨L⟩_s, the latter also as 2∫(∫⟨L⟩dB)dB.

    ⟨L⟩_0 = 1 counts as an atom at 0. On a grid the double integral picks up the
    quadratic-variation term Σ⟨L⟩_{s-}(ΔB_s)², returned separately as ``correction``.
    """
    eps = np.asarray(eps.values if isinstance(eps, SamplePath) else eps, dtype=float)
    gamma = decomposition.gamma.values
    bracket = decomposition.bracket.values

    dB = np.diff(eps) / gamma[1:]
    B = step_integral(dB, 1.0)
    masses = np.concatenate(([bracket[0]], np.diff(bracket)))

    first = step_integral(B[1:], np.diff(bracket))
    second = step_integral(B[1:] ** 2, np.diff(bracket))
    B_tilde = B ** 2 * (masses[0] + bracket - bracket[0]) - 2.0 * B * first + second

    inner = step_integral(bracket[:-1], dB)
    double_integral = 2.0 * step_integral(inner[:-1], dB)
    correction = step_integral(bracket[:-1], dB ** 2)
    return BTildeIdentity(B=B, B_tilde=B_tilde, double_integral=double_integral, correction=correction)


def b_tilde_ratio(identity: BTildeIdentity, eps) -> np.ndarray:
    """ε_t²/B̃_t, infinite where B̃ vanishes."""
    eps = np.asarray(eps.values if isinstance(eps, SamplePath) else eps, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(identity.B_tilde > 0, eps ** 2 / identity.B_tilde, np.inf)


def toeplitz_average(values, weights) -> np.ndarray:
    """Running weighted means Σ_{j<=n} w_j a_j / Σ_{j<=n} w_j."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    totals = np.cumsum(weights)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(totals > 0, np.cumsum(weights * values) / totals, 0.0)


def kronecker_ratio(x_increments, levels) -> np.ndarray:
    """X_t/L_t for X_t = Σ ΔX_s and an increasing level path L (one more entry than ΔX)."""
    levels = np.asarray(levels, dtype=float)
    X = step_integral(np.ones(len(x_increments)), x_increments)
    return X / levels


def kronecker_series(x_increments, levels) -> np.ndarray:
    """Σ ΔX_s/(1 + L_s), the series whose convergence drives X_t/L_t → 0."""
    levels = np.asarray(levels, dtype=float)
    return step_integral(1.0 / (1.0 + levels[1:]), x_increments)
