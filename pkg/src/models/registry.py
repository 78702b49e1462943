import logging
from typing import Callable, Dict, Tuple

import numpy as np

from src.core.errors import ValidationError
from src.core.grid import TimeGrid
from src.models.galton_watson import build_galton_watson
from src.models.noise import GaussianNoise
from src.models.spec import ModelId, ModelName, ModelSpec, like, ratio_field

logger = logging.getLogger(__name__)


PARAMETER_DEFAULTS: Dict[ModelName, Dict[str, float]] = {
    ModelName.LINEAR_STANDARD: {"alpha": 1.0, "beta": 1.0, "sigma": 1.0},
    ModelName.LINEAR_SLOW_GAIN: {"alpha": 0.5, "beta": 1.0, "sigma": 1.0, "r": 0.9},
    ModelName.RM_SLOW_GAIN: {"alpha": 0.5, "beta": 1.0, "sigma": 1.0, "r": 0.9, "c": 0.1},
    ModelName.GALTON_WATSON: {"theta0": 0.0},
    ModelName.DETERMINISTIC_REGRESSION: {"b": -1.0, "c": 0.0, "a": 1.0, "sigma": 1.0},
    ModelName.CUSTOM: {"b": 1.0, "sigma": 1.0},
}

REQUIRED_PARAMETERS: Dict[ModelName, Tuple[str, ...]] = {
    ModelName.GALTON_WATSON: ("theta",),
}


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValidationError(message)


def resolve_parameters(model_id: ModelId) -> Dict[str, float]:
    name = model_id.name
    allowed = set(PARAMETER_DEFAULTS[name]) | set(REQUIRED_PARAMETERS.get(name, ()))
    given = model_id.as_dict()

    unknown = sorted(set(given) - allowed)
    _require(not unknown, f"{name.value}: unknown parameter(s) {', '.join(unknown)}")
    missing = [key for key in REQUIRED_PARAMETERS.get(name, ()) if key not in given]
    _require(not missing, f"{name.value}: missing parameter(s) {', '.join(missing)}")

    params = dict(PARAMETER_DEFAULTS[name])
    params.update(given)
    return params


def validate_model_id(model_id: ModelId) -> Dict[str, float]:
    p = resolve_parameters(model_id)
    name = model_id.name

    if name == ModelName.LINEAR_STANDARD:
        _require(p["alpha"] > 0 and p["beta"] > 0, "linear_standard requires α > 0 and β > 0")
        _require(2.0 * p["alpha"] * p["beta"] > 1.0, "linear_standard requires 2αβ > 1")
        _require(p["sigma"] >= 0, "linear_standard requires σ >= 0")
    elif name in (ModelName.LINEAR_SLOW_GAIN, ModelName.RM_SLOW_GAIN):
        _require(0.5 < p["r"] < 1.0, f"{name.value} requires 1/2<r<1")
        _require(p["alpha"] > 0 and p["beta"] > 0, f"{name.value} requires α > 0 and β > 0")
        _require(p["sigma"] >= 0, f"{name.value} requires σ >= 0")
        if name == ModelName.RM_SLOW_GAIN:
            _require(p["alpha"] < 1.0, "rm_slow_gain requires 0<α<1")
    elif name == ModelName.GALTON_WATSON:
        _require(p["theta"] > 0, "galton_watson requires θ > 0")
    elif name == ModelName.DETERMINISTIC_REGRESSION:
        _require(p["b"] < 0, "deterministic_regression requires b < 0")
        _require(abs(p["c"]) < abs(p["b"]), "deterministic_regression requires |c| < |b|")
        _require(p["a"] > 0 and p["sigma"] >= 0, "deterministic_regression requires a > 0 and σ >= 0")
    elif name == ModelName.CUSTOM:
        _require(p["sigma"] >= 0, "custom requires σ >= 0")

    return p


def _left(grid: TimeGrid) -> Callable:
    K_left = grid.K_left

    def at(i):
        return K_left[np.asarray(i) - 1]

    return at


def _assemble(model_id, grid, drift, ell, beta, gamma, beta_field=None, **flags) -> ModelSpec:
    left = _left(grid)
    if beta_field is None:
        beta_field = lambda i, u: like(beta(i), u)
    return ModelSpec(
        model_id=model_id,
        grid=grid,
        drift_field=drift,
        noise_coeff_field=lambda i, u: like(ell(i), u),
        qc_density=lambda i, u, v: like(ell(i) ** 2, np.asarray(u) * v),
        beta=beta,
        beta_field=beta_field,
        gamma=gamma,
        weight_g=lambda i: 1.0 / (1.0 + left(i)),
        z0=model_id.z0,
        noise=GaussianNoise(),
        **flags,
    )


def _linear_standard(model_id, grid, p):
    left = _left(grid)
    gain = lambda i: p["alpha"] * p["beta"] / (1.0 + left(i))
    ell = lambda i: p["alpha"] * p["sigma"] / (1.0 + left(i))
    K = grid.K
    return _assemble(
        model_id, grid,
        drift=lambda i, u: -gain(i) * np.asarray(u),
        ell=ell,
        beta=gain,
        gamma=lambda n: (1.0 + K[n]) ** 2,
        delta0=1.0,
        linear=True,
    )


def _slow_gain(model_id, grid, p, nonlinear: bool):
    left = _left(grid)
    r = p["r"]
    scale = lambda i: p["alpha"] / (1.0 + left(i)) ** r
    gain = lambda i: scale(i) * p["beta"]
    ell = lambda i: scale(i) * p["sigma"]
    K = grid.K

    if nonlinear:
        c = p["c"]
        regression = lambda u: p["beta"] * u - c * u * u
        drift = lambda i, u: -scale(i) * regression(np.asarray(u, dtype=float))
        beta_field = lambda i, u: like(scale(i), u) * (p["beta"] - c * np.asarray(u, dtype=float))
    else:
        drift = lambda i, u: -gain(i) * np.asarray(u)
        beta_field = None

    return _assemble(
        model_id, grid,
        drift=drift,
        ell=ell,
        beta=gain,
        gamma=lambda n: (1.0 + K[n]) ** (2.0 * r),
        beta_field=beta_field,
        delta0=2.0 - 1.0 / r,
        linear=not nonlinear,
        expansion_guaranteed=(not nonlinear) or r > 0.8,
    )


def _deterministic_regression(model_id, grid, p):
    left = _left(grid)
    K = grid.K
    b, c = p["b"], p["c"]
    gain = lambda i: p["a"] / (1.0 + left(i))

    def drift(i, u):
        u = np.asarray(u, dtype=float)
        return gain(i) * (b * u + c * np.tanh(u))

    beta = lambda i: -gain(i) * (b + c)
    return _assemble(
        model_id, grid,
        drift=drift,
        ell=lambda i: gain(i) * p["sigma"],
        beta=beta,
        beta_field=ratio_field(drift, beta),
        gamma=lambda n: (1.0 + K[n]) ** 2,
        delta0=1.0,
        linear=c == 0.0,
    )


def _custom(model_id, grid, p):
    K = grid.K
    b = p["b"]
    return _assemble(
        model_id, grid,
        drift=lambda i, u: -b * np.asarray(u, dtype=float),
        ell=lambda i: p["sigma"] + 0.0 * np.asarray(i, dtype=float),
        beta=lambda i: b + 0.0 * np.asarray(i, dtype=float),
        gamma=lambda n: 1.0 + K[n],
        delta0=1.0,
        linear=True,
    )


def build_model(model_id: ModelId, grid: TimeGrid) -> ModelSpec:
    p = validate_model_id(model_id)
    name = model_id.name

    if name == ModelName.LINEAR_STANDARD:
        spec = _linear_standard(model_id, grid, p)
    elif name == ModelName.LINEAR_SLOW_GAIN:
        spec = _slow_gain(model_id, grid, p, nonlinear=False)
    elif name == ModelName.RM_SLOW_GAIN:
        spec = _slow_gain(model_id, grid, p, nonlinear=True)
    elif name == ModelName.GALTON_WATSON:
        spec = build_galton_watson(model_id, grid, theta=p["theta"], theta0=p["theta0"])
    elif name == ModelName.DETERMINISTIC_REGRESSION:
        spec = _deterministic_regression(model_id, grid, p)
    else:
        spec = _custom(model_id, grid, p)

    logger.info(f"Built model {name.value} on {grid.n_steps} steps")
    return spec


def custom_model(
    grid: TimeGrid,
    drift_field,
    noise_coeff_field=None,
    beta=None,
    beta_field=None,
    qc_density=None,
    gamma=None,
    z0: float = 0.0,
    delta0: float = 1.0,
    linear: bool = False,
) -> ModelSpec:
    """Model from user-supplied evaluators; missing pieces are derived from the drift."""
    if noise_coeff_field is None:
        noise_coeff_field = lambda i, u: like(0.0, u)
    if beta is None:
        tiny = 1e-8
        beta = lambda i: -np.asarray(drift_field(i, tiny), dtype=float) / tiny
    if beta_field is None:
        beta_field = ratio_field(drift_field, beta)
    if qc_density is None:
        qc_density = lambda i, u, v: np.asarray(noise_coeff_field(i, u)) * noise_coeff_field(i, v)
    if gamma is None:
        K = grid.K
        gamma = lambda n: (1.0 + K[n]) ** 2
    left = _left(grid)
    return ModelSpec(
        model_id=ModelId.of(ModelName.CUSTOM, z0=z0),
        grid=grid,
        drift_field=drift_field,
        noise_coeff_field=noise_coeff_field,
        qc_density=qc_density,
        beta=beta,
        beta_field=beta_field,
        gamma=gamma,
        weight_g=lambda i: 1.0 / (1.0 + left(i)),
        z0=z0,
        noise=GaussianNoise(),
        delta0=delta0,
        linear=linear,
    )


def schedule_model(grid: TimeGrid, beta_values, gamma_values, noise_values=None,
                   z0: float = 1.0, delta0: float = 1.0) -> ModelSpec:
    """Linear model H_t(u) = −β_t u driven by explicit per-step gain and rate schedules."""
    beta_values = np.asarray(beta_values, dtype=float)
    gamma_values = np.asarray(gamma_values, dtype=float)
    if beta_values.shape != (grid.n_steps,) or gamma_values.shape != (grid.n_steps + 1,):
        raise ValidationError("schedule needs one gain per step and one rate value per grid point")
    ell_values = np.zeros(grid.n_steps) if noise_values is None else np.asarray(noise_values, dtype=float)

    beta = lambda i: beta_values[np.asarray(i) - 1]
    return custom_model(
        grid,
        drift_field=lambda i, u: -beta(i) * np.asarray(u, dtype=float),
        noise_coeff_field=lambda i, u: like(ell_values[np.asarray(i) - 1], u),
        beta=beta,
        beta_field=lambda i, u: like(beta(i), u),
        gamma=lambda n: gamma_values[n],
        z0=z0,
        delta0=delta0,
        linear=True,
    )

