from rich import box
from rich.console import Group
from rich.table import Table

from .report import (
    BOUND_COLUMNS,
    CHECK_COLUMNS,
    RUN_COLUMNS,
    SUMMARY_COLUMNS,
    portfolio_columns,
    table_columns,
)

# significant digits of floats in terminal tables
DISPLAY_DIGITS = 6

_TEXT_COLUMNS = ("instrument", "label", "kind", "metric", "hedge", "name", "detail")


def _cell(value):
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "NO"
    if isinstance(value, float):
        return f"{value:.{DISPLAY_DIGITS}g}"
    return str(value)


def richify_rows(rows, columns, title=None):
    """Create and return rich.Table holding the given columns of the rows."""
    table = Table(title=title, show_edge=False, box=box.SIMPLE_HEAVY, expand=False)
    for column in columns:
        table.add_column(
            column.upper(), justify="left" if column in _TEXT_COLUMNS else "right"
        )
    for row in rows:
        style = None
        if row.get("passed") is False:
            style = "red"
        table.add_row(*[_cell(row.get(column)) for column in columns], style=style)
    return table


def richify_response(response):
    """Create and return a rich renderable for an engine response."""
    if "rows" in response:
        tables = [richify_rows(response["rows"], BOUND_COLUMNS, title="Bounds")]
        if response.get("summary"):
            tables.append(
                richify_rows(response["summary"], SUMMARY_COLUMNS, title="Across runs")
            )
        if response.get("run_ids"):
            ids = ", ".join(str(i) for i in response["run_ids"])
            tables.append(f"Archived runs: {ids}")
        return Group(*tables)
    if "table" in response:
        return richify_rows(
            response["table"],
            table_columns(response["columns"]),
            title="Hedging losses",
        )
    if "portfolio" in response:
        return richify_rows(
            response["portfolio"],
            portfolio_columns(response["dim"]),
            title="Static hedge portfolio",
        )
    if "checks" in response:
        return richify_rows(response["checks"], CHECK_COLUMNS, title="Self-checks")
    if "runs" in response:
        if not response["runs"]:
            return "No runs archived."
        return richify_rows(response["runs"], RUN_COLUMNS, title="Archived runs")
    return ""
