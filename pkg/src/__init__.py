"""SA Lab: Robbins–Monro simulation, normalization and condition checks."""
from src.config import settings

__version__ = settings.app.version
__cli_name__ = settings.app.cli_name

__all__ = ["__version__", "__cli_name__", "settings"]
