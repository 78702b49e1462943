import logging
import math

import numpy as np

from src.config import settings
from src.core.errors import ValidationError
from src.core.grid import TimeGrid
from src.models.noise import ObservationNoise
from src.models.spec import ModelId, ModelSpec, like

logger = logging.getLogger(__name__)


def gw_transition(theta: float, x_prev: float, rng: np.random.Generator) -> float:
    """One generation: 1 immigrant plus Poisson(θ) offspring for each of x_prev individuals.

    Counts are floats; a population beyond the float range comes back as inf.
    """
    if not theta > 0:
        raise ValidationError(f"galton_watson requires theta > 0, got {theta}")
    if x_prev == 0:
        return 1.0
    mean = theta * x_prev
    if not math.isfinite(mean):
        return math.inf
    if mean > settings.numerics.poisson_normal_cutoff:
        with np.errstate(over="ignore"):
            draw = float(np.round(mean + math.sqrt(mean) * rng.standard_normal()))
        return 1.0 + max(0.0, draw)
    return 1.0 + float(rng.poisson(mean))


def draw_observations(theta: float, n_steps: int, rng: np.random.Generator) -> np.ndarray:
    """X_0 = 1, X_1..X_n; NaN from the first generation whose count or running sum overflows."""
    x = np.full(n_steps + 1, np.nan)
    x[0] = 1.0
    total = 1.0
    for n in range(1, n_steps + 1):
        current = gw_transition(theta, float(x[n - 1]), rng)
        if not (math.isfinite(current) and math.isfinite(total + current)):
            logger.warning(f"Galton–Watson population left the float range at generation {n}")
            break
        x[n] = current
        total += current
    return x


def exhausted_step(observations: np.ndarray) -> np.ndarray:
    """First step that needs a missing observation, per replication; -1 when the path is complete."""
    missing = np.isnan(np.atleast_2d(observations))
    return np.where(missing.any(axis=-1), np.argmax(missing, axis=-1), -1)


def partial_sums(observations: np.ndarray) -> np.ndarray:
    """S_n = X_0 + ... + X_{n-1}, with S_0 = 0."""
    s = np.zeros(observations.shape)
    np.cumsum(observations[..., :-1], axis=-1, out=s[..., 1:])
    return s


def mle_path(observations: np.ndarray) -> np.ndarray:
    """Closed-form estimates Σ(X_i − 1)/ΣX_{i−1} for n = 1..N; NaN past the end of a saturated path."""
    x = np.asarray(observations, dtype=float)
    return np.cumsum(x[1:] - 1.0) / np.cumsum(x[:-1])


def recursive_estimates(observations: np.ndarray, theta0: float) -> np.ndarray:
    x = np.asarray(observations, dtype=float)
    s = partial_sums(x)
    theta = np.empty(x.size)
    theta[0] = theta0
    for n in range(1, x.size):
        theta[n] = theta[n - 1] + (x[n] - 1.0 - theta[n - 1] * x[n - 1]) / s[n]
    return theta


def innovations(theta: float):
    def source(observations, start, stop):
        current = observations[..., start + 1:stop + 1]
        previous = observations[..., start:stop]
        return current - 1.0 - theta * previous, theta * previous

    return source


def build_galton_watson(model_id: ModelId, grid: TimeGrid, theta: float, theta0: float,
                        observations=None) -> ModelSpec:
    if not grid.is_discrete:
        raise ValidationError("galton_watson requires a discrete grid (ΔK = 1 per observation)")

    def unbound(*_):
        raise ValidationError("galton_watson evaluators need a realized observation path")

    def bind(x: np.ndarray) -> ModelSpec:
        return build_galton_watson(model_id, grid, theta, theta0, observations=np.asarray(x, dtype=float))

    K = grid.K
    gamma = lambda n: (1.0 + K[n]) ** 2
    weight_g = lambda i: 1.0 / (1.0 + K[np.asarray(i) - 1])
    noise = ObservationNoise(
        draw=lambda n_steps, rng: draw_observations(theta, n_steps, rng),
        innovations=innovations(theta),
        exhausted=exhausted_step,
    )
    common = dict(
        model_id=model_id,
        grid=grid,
        gamma=gamma,
        weight_g=weight_g,
        z0=theta0 - theta,
        noise=noise,
        delta0=1.0,
        linear=True,
        deterministic_gains=False,
        bind_observations=bind,
    )

    if observations is None:
        return ModelSpec(
            drift_field=unbound,
            noise_coeff_field=unbound,
            qc_density=unbound,
            beta=unbound,
            beta_field=unbound,
            **common,
        )

    x = observations
    s = partial_sums(x)

    def gain(i):
        i = np.asarray(i)
        return x[..., i - 1] / s[..., i]

    def coeff(i):
        return 1.0 / s[..., np.asarray(i)]

    return ModelSpec(
        drift_field=lambda i, u: -np.asarray(u) * gain(i),
        noise_coeff_field=lambda i, u: like(coeff(i), u),
        qc_density=lambda i, u, v: like(theta * x[..., np.asarray(i) - 1] * coeff(i) ** 2, np.asarray(u) * v),
        beta=gain,
        beta_field=lambda i, u: like(gain(i), u),
        observations=x,
        **common,
    )
