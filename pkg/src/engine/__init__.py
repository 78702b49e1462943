from src.engine.stepper import EulerStepper, BlockResult, PathRecorder
from src.engine.simulator import RmRun, noiseless_run, simulate, simulate_many
from src.engine.squares import Representation, ZSquaredDecomposition, coefficient_bound, decompose_z_squared, drift_terms

__all__ = [
    "EulerStepper",
    "BlockResult",
    "PathRecorder",
    "RmRun",
    "simulate",
    "simulate_many",
    "noiseless_run",
    "Representation",
    "ZSquaredDecomposition",
    "coefficient_bound",
    "decompose_z_squared",
    "drift_terms",
]
