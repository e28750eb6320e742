import json
from typing import Any

from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from checker_engine import NEGATIVE_VERDICTS, Report

# stdout belongs to the JSON report.
console = Console(stderr=True)


def verdict_style(verdict: str) -> str:
    return "bold red" if verdict in NEGATIVE_VERDICTS else "bold green"


def make_header(report: Report) -> Panel:
    grid = Table.grid(expand=True)
    grid.add_column(justify="left", ratio=1)
    grid.add_column(justify="right", ratio=1)
    depth = f"depth {report.depths_checked}" if report.depths_checked is not None else ""
    grid.add_row(
        Text(report.command, style="bold cyan"),
        Text(f"{report.verdict} {depth}".strip(), style=verdict_style(report.verdict)),
    )
    return Panel(grid, style="blue", box=box.ROUNDED)


def make_violations_table(report: Report) -> Table:
    """One row per violation; the columns follow the keys of the first one."""
    columns = list(report.violations[0].keys())
    table = Table(expand=True, box=box.MINIMAL_HEAVY_HEAD, border_style="bright_black")
    for name in columns:
        table.add_column(name.capitalize(), style="cyan" if name in ("condition", "code") else None)
    for violation in report.violations:
        table.add_row(*(_cell(violation.get(name)) for name in columns))
    return table


def make_values_table(values: Any) -> Table:
    table = Table(expand=True, box=box.SIMPLE, show_header=False)
    table.add_column(style="dim")
    table.add_column(style="bold")
    if isinstance(values, dict):
        for key, value in values.items():
            table.add_row(str(key), _cell(value))
    elif isinstance(values, list):
        for i, value in enumerate(values):
            table.add_row(str(i), _cell(value))
    else:
        table.add_row("output", _cell(values))
    return table


def _cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, (dict, list)):
        return json.dumps(value, ensure_ascii=False)
    return str(value)


def render_report(report: Report):
    console.print(make_header(report))
    if report.witness is not None:
        console.print(Panel(_cell(report.witness), title="Witness", border_style="yellow"))
    if report.violations:
        console.print(Panel(make_violations_table(report), title="Violations", border_style="red"))
    if report.values is not None:
        console.print(Panel(make_values_table(report.values), title="Values", border_style="blue"))


def render_error(message: str):
    console.print(Panel(Text(message, style="bold white on red"), title="Error", style="red"))
