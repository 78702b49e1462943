from src.config.settings import settings, DiagnosticsConfig, NumericsConfig

__all__ = [
    "settings",
    "DiagnosticsConfig",
    "NumericsConfig",
]
