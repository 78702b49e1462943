from rich.style import Style
from rich.theme import Theme as RichTheme


class Colors:
    PRIMARY = "#4A90D9"
    SECONDARY = "#7B68EE"
    SUCCESS = "#50C878"
    WARNING = "#FFB347"
    ERROR = "#FF6B6B"
    INFO = "#87CEEB"

    TEXT = "#FFFFFF"
    TEXT_DIM = "#888888"
    TEXT_MUTED = "#666666"

    BORDER = "#4A4A6A"


class Symbols:
    SIGMA = "Σ"
    CHECK = "✓"
    CROSS = "✗"
    QUESTION = "?"
    BULLET = "•"


class Theme:
    CUSTOM_THEME = RichTheme({
        "primary": Style(color=Colors.PRIMARY),
        "secondary": Style(color=Colors.SECONDARY),
        "success": Style(color=Colors.SUCCESS),
        "warning": Style(color=Colors.WARNING),
        "error": Style(color=Colors.ERROR),
        "info": Style(color=Colors.INFO),

        "text": Style(color=Colors.TEXT),
        "text.dim": Style(color=Colors.TEXT_DIM),
        "text.muted": Style(color=Colors.TEXT_MUTED),

        "header": Style(color=Colors.PRIMARY, bold=True),
        "header.title": Style(color=Colors.TEXT, bold=True),
        "header.subtitle": Style(color=Colors.TEXT_DIM),

        "verdict.holds": Style(color=Colors.SUCCESS, bold=True),
        "verdict.fails": Style(color=Colors.ERROR, bold=True),
        "verdict.inconclusive": Style(color=Colors.WARNING),

        "stat.name": Style(color=Colors.PRIMARY),
        "stat.value": Style(color=Colors.TEXT),
        "stat.predicted": Style(color=Colors.SECONDARY),

        "border": Style(color=Colors.BORDER),
    })

    VERDICT_SYMBOLS = {
        "holds": Symbols.CHECK,
        "fails": Symbols.CROSS,
        "inconclusive": Symbols.QUESTION,
    }

    @staticmethod
    def get_theme() -> RichTheme:
        return Theme.CUSTOM_THEME

    @staticmethod
    def style_verdict(verdict: str) -> str:
        symbol = Theme.VERDICT_SYMBOLS.get(verdict, Symbols.QUESTION)
        return f"[verdict.{verdict}]{symbol} {verdict}[/verdict.{verdict}]"

    @staticmethod
    def format_match(matches: bool) -> str:
        if matches:
            return f"[success]{Symbols.CHECK}[/success]"
        return f"[error]{Symbols.CROSS}[/error]"
