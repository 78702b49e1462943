from typing import Optional


class LabError(Exception):
    """Base class for errors raised by the laboratory."""


class GridMismatchError(LabError, ValueError):
    pass


class ValidationError(LabError, ValueError):
    pass


class ZeroFactorError(LabError, ArithmeticError):
    def __init__(self, step: int, message: Optional[str] = None):
        self.step = step
        super().__init__(message or f"step {step}: zero exponential factor (β ΔK = 1 jump not excised)")


class EvaluatorError(LabError, ArithmeticError):
    def __init__(self, step: int, state: float, message: str):
        self.step = step
        self.state = state
        super().__init__(f"step {step}, state {state!r}: {message}")


class ConfigError(LabError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class AllDivergentError(LabError):
    pass
