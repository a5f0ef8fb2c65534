"""Shared Rich console instance and output helpers for the slhvb_lab CLI."""

from typing import Optional

from rich.console import Console
from rich.table import Table
from rich.theme import Theme

_theme = Theme(
    {
        "success": "bold green",
        "error": "bold red",
        "warning": "yellow",
        "info": "cyan",
        "metric": "bold magenta",
    }
)

console = Console(theme=_theme)
# Reports go to stdout; status lines go to stderr so piped CSV stays clean.
status_console = Console(theme=_theme, stderr=True)


def success(msg: str) -> None:
    status_console.print(f"[success]✅ {msg}[/success]")


def error(msg: str) -> None:
    status_console.print(f"[error]❌ {msg}[/error]")


def warning(msg: str) -> None:
    status_console.print(f"[warning]⚠️  {msg}[/warning]")


def info(msg: str) -> None:
    status_console.print(f"[info]{msg}[/info]")


def frame_table(df, title: Optional[str] = None) -> Table:
    """Render a small DataFrame as a Rich table."""
    table = Table(title=title)
    for column in df.columns:
        table.add_column(str(column))
    for row in df.itertuples(index=False):
        table.add_row(*(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))
    return table
