from src.ui.report import ReportView
from src.ui.styles import Theme, Colors, Symbols

__all__ = [
    "ReportView",
    "Theme",
    "Colors",
    "Symbols",
]
