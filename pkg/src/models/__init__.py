from src.models.spec import ModelId, ModelName, ModelSpec
from src.models.registry import (
    build_model,
    custom_model,
    schedule_model,
    validate_model_id,
    resolve_parameters,
)
from src.models.galton_watson import (
    gw_transition,
    draw_observations,
    mle_path,
    recursive_estimates,
    exhausted_step,
)

__all__ = [
    "ModelId",
    "ModelName",
    "ModelSpec",
    "build_model",
    "custom_model",
    "schedule_model",
    "validate_model_id",
    "resolve_parameters",
    "gw_transition",
    "draw_observations",
    "mle_path",
    "recursive_estimates",
    "exhausted_step",
]
