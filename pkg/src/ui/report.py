from contextlib import contextmanager
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from rich.align import Align
from rich.console import Console, Group
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn
from rich.table import Table
from rich.text import Text

from src.config import settings
from src.diagnostics.fixtures import FixtureOutcome
from src.diagnostics.report import ConditionReport
from src.montecarlo.statistics import McSummary
from src.ui.styles.theme import Symbols, Theme


def _num(value: Optional[float], digits: int = 6) -> str:
    if value is None or value != value:
        return "-"
    return f"{value:.{digits}g}"


class ReportView:
    """Console rendering of run headers, condition verdicts and Monte Carlo summaries."""

    def __init__(self, console: Optional[Console] = None, record: bool = False):
        self._console = console or Console(theme=Theme.get_theme(), record=record)

    @property
    def console(self) -> Console:
        return self._console

    def render_header(self, title: str, lines: Sequence[Tuple[str, str]] = ()) -> None:
        title_text = Text()
        title_text.append(f"{Symbols.SIGMA} ", style="primary")
        title_text.append(settings.app.app_name.upper(), style="header.title")
        title_text.append(f"  {Symbols.BULLET}  ", style="text.dim")
        title_text.append(title, style="header.subtitle")

        content = [Align.center(title_text)]
        for key, value in lines:
            line = Text()
            line.append(f"{key}: ", style="text.dim")
            line.append(str(value), style="text")
            content.append(line)

        self._console.print(Panel(Group(*content), border_style="primary", padding=(0, 2)))

    def render_conditions(self, reports: Iterable[ConditionReport], title: str = "Conditions") -> None:
        table = Table(title=title, show_header=True, header_style="header", border_style="border")
        table.add_column("Condition", style="stat.name")
        table.add_column("Verdict")
        table.add_column("Witness", justify="right")
        table.add_column("Monitored", justify="right")
        table.add_column("Basis", style="text.dim")
        table.add_column("Note", style="text.muted")

        for report in reports:
            witness = "-" if report.witness_step is None else str(report.witness_step)
            if report.witness_u is not None:
                witness += f" (u={report.witness_u:.4g})"
            table.add_row(
                report.condition_id.value,
                Theme.style_verdict(report.verdict.value),
                witness,
                _num(report.monitored_final),
                report.basis,
                report.note,
            )
        self._console.print(table)

    def render_mc_summary(self, summary: McSummary) -> None:
        table = Table(
            title=f"Monte Carlo: {summary.model}, {summary.replications} replications",
            show_header=True,
            header_style="header",
            border_style="border",
        )
        for name in ("Statistic", "t", "Mean", "Variance", "Predicted", "KS", "n", "Divergent", "|·| q90"):
            table.add_column(name, justify="left" if name == "Statistic" else "right")

        for row in summary.rows:
            table.add_row(
                f"[stat.name]{row.label}[/stat.name]",
                _num(row.time),
                _num(row.mean),
                _num(row.variance),
                f"[stat.predicted]{_num(row.predicted)}[/stat.predicted]",
                _num(row.ks, 4),
                str(row.n),
                str(row.divergent),
                _num(row.abs_q90),
            )
        self._console.print(table)

        ratio = summary.variance_ratio()
        if ratio is not None:
            self._console.print(f"[text.dim]averaged / plain variance ratio:[/text.dim] {ratio:.4g}")
        self._console.print(f"[text.dim]elapsed {summary.elapsed:.2f}s[/text.dim]")

    def render_fixtures(self, outcomes: List[FixtureOutcome]) -> None:
        table = Table(title="Reference verdicts", show_header=True, header_style="header", border_style="border")
        table.add_column("Fixture", style="stat.name")
        table.add_column("Condition")
        table.add_column("δ", justify="right")
        table.add_column("Expected")
        table.add_column("Observed")
        table.add_column("", justify="center")

        for o in outcomes:
            table.add_row(
                o.fixture,
                o.condition_id.value,
                "-" if o.delta is None else f"{o.delta:g}",
                Theme.style_verdict(o.expected.value),
                Theme.style_verdict(o.observed.value),
                Theme.format_match(o.matches),
            )
        self._console.print(table)

    def render_error(self, message: str) -> None:
        self._console.print(f"[error]{Symbols.CROSS} {message}[/error]")

    def render_done(self, message: str) -> None:
        self._console.print(f"[success]{Symbols.CHECK}[/success] {message}")

    def export_text(self) -> str:
        return self._console.export_text()

    @contextmanager
    def progress(self, description: str, total: int) -> Iterator:
        """Progress bar; yields a callback taking the number of finished items."""
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
            console=self._console,
            transient=True,
        ) as progress:
            task = progress.add_task(f"[primary]{description}", total=total)
            yield lambda done: progress.advance(task, done)
