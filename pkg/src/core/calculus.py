import logging

import numpy as np

from src.core.errors import GridMismatchError, ZeroFactorError
from src.core.grid import SamplePath, TimeGrid

logger = logging.getLogger(__name__)


def _per_step(values, grid: TimeGrid, what: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.ndim == 0:
        array = np.full(grid.n_steps, float(array))
    if array.shape != (grid.n_steps,):
        raise GridMismatchError(f"{what} has {array.size} entries, grid has {grid.n_steps} steps")
    return array


def step_integral(per_step_integrand, increments) -> np.ndarray:
    """Cumulative sum of a_i * dX_i with a zero prepended (integrand already predictable)."""
    terms = np.asarray(per_step_integrand, dtype=float) * np.asarray(increments, dtype=float)
    out = np.zeros(terms.shape[:-1] + (terms.shape[-1] + 1,))
    np.cumsum(terms, axis=-1, out=out[..., 1:])
    return out


def stochastic_integral(integrand: SamplePath, increments) -> SamplePath:
    grid = integrand.grid
    increments = _per_step(increments, grid, "increments")
    values = step_integral(integrand.values[:-1], increments)
    return SamplePath.guarded(grid, values)


def dolean_factors(drift_density, grid: TimeGrid) -> np.ndarray:
    r = _per_step(drift_density, grid, "drift density")
    x = r * grid.dK
    with np.errstate(over="ignore"):
        return np.where(grid.jump_flag, 1.0 - x, np.exp(-x))


def dolean_exponential(drift_density, grid: TimeGrid) -> SamplePath:
    """ε(−r∘K): exponential factor on continuous steps, product factor on jump steps."""
    factors = dolean_factors(drift_density, grid)
    with np.errstate(over="ignore", under="ignore"):
        values = np.concatenate(([1.0], np.cumprod(factors)))
    return SamplePath.guarded(grid, values, guard=np.inf)


def inverse_exponential(drift_density, grid: TimeGrid) -> SamplePath:
    factors = dolean_factors(drift_density, grid)
    zero = np.flatnonzero(factors == 0.0)
    if zero.size:
        raise ZeroFactorError(int(zero[0]) + 1)
    forward = dolean_exponential(drift_density, grid)
    with np.errstate(divide="ignore", over="ignore"):
        values = 1.0 / forward.values
    return SamplePath.guarded(grid, values, guard=np.inf)


def log_weight_process(weight_g, grid: TimeGrid) -> np.ndarray:
    """log ε(+g∘K) with g >= 0, accumulated in log space."""
    g = _per_step(weight_g, grid, "weight")
    x = g * grid.dK
    increments = np.where(grid.jump_flag, np.log1p(x), x)
    return np.concatenate(([0.0], np.cumsum(increments)))
