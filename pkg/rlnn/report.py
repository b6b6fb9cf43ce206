"""Tabular output of bounds, cross-run summaries, hedge tables and portfolios
as CSV or JSON text."""
import csv
import io
from json import dumps as jdumps

import numpy as np

BOUND_COLUMNS = (
    "instrument",
    "s0",
    "p",
    "seed",
    "direct",
    "lower",
    "lower_se",
    "upper",
    "upper_se",
)
SUMMARY_COLUMNS = (
    "instrument",
    "s0",
    "p",
    "runs",
    "direct",
    "direct_se",
    "lower",
    "lower_se",
    "upper",
    "upper_se",
)
RUN_COLUMNS = ("id", "label", "kind", "dim", "dates", "hidden", "seed", "direct")
CHECK_COLUMNS = ("name", "passed", "detail")

# significant digits of floats in CSV output
CSV_DIGITS = 6

MISSING = "NA"


def bound_row(instrument, s0, hidden, seed, report):
    """One output row of a priced instrument.

    :type report: bounds.BoundReport
    """
    return {
        "instrument": instrument,
        "s0": float(s0),
        "p": int(hidden),
        "seed": int(seed),
        "direct": None if report.direct is None else float(report.direct),
        "lower": report.lower,
        "lower_se": report.lower_se,
        "upper": report.upper,
        "upper_se": report.upper_se,
    }


def portfolio_columns(dim):
    return (
        ("leg_index", "maturity", "quantity", "bias")
        + tuple(f"w_{i + 1}" for i in range(dim))
        + ("classification",)
    )


def portfolio_rows(port):
    """One row per leg and a final cash row.

    :type port: hedge.StaticHedgePortfolio
    """
    rows = []
    for index, leg in enumerate(port.legs):
        row = {
            "leg_index": index,
            "maturity": leg.maturity,
            "quantity": leg.quantity,
            "bias": leg.bias,
            "classification": None
            if leg.classification is None
            else leg.classification.kind,
        }
        row.update({f"w_{i + 1}": float(w) for i, w in enumerate(leg.weights)})
        rows.append(row)

    cash = {column: None for column in portfolio_columns(port.dim)}
    cash.update(
        {"leg_index": "cash", "maturity": port.maturity, "quantity": port.cash}
    )
    rows.append(cash)
    return rows


def table_columns(columns):
    return ("metric", "hedge", "count") + tuple(str(c) for c in columns)


def _plain(value):
    """Convert numpy scalars for serialization."""
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)) and not isinstance(value, bool):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _csv_cell(value):
    value = _plain(value)
    if value is None:
        return MISSING
    if isinstance(value, float):
        return f"{value:.{CSV_DIGITS}g}"
    return str(value)


def to_csv(rows, columns):
    """Format rows as CSV with a header line; floats are printed with
    CSV_DIGITS significant digits."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def to_json(data):
    """Format data as JSON; floats keep their shortest round-trip
    representation."""

    def convert(obj):
        if isinstance(obj, dict):
            return {str(k): convert(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [convert(v) for v in obj]
        return _plain(obj)

    return jdumps(convert(data), indent=2) + "\n"


def prettify(response, output_format="csv"):
    """Render the tabular parts of an engine response as text. CSV output lists
    the main table followed by the summary table, if any.

    :return: str
    """
    if output_format == "json":
        return to_json(
            {k: v for k, v in response.items() if k not in ("run_ids", "columns")}
        )

    if "rows" in response:
        text = to_csv(response["rows"], BOUND_COLUMNS)
        if response.get("summary"):
            text += "\n" + to_csv(response["summary"], SUMMARY_COLUMNS)
        return text
    if "table" in response:
        return to_csv(response["table"], table_columns(response["columns"]))
    if "portfolio" in response:
        return to_csv(response["portfolio"], portfolio_columns(response["dim"]))
    if "checks" in response:
        return to_csv(response["checks"], CHECK_COLUMNS)
    if "runs" in response:
        return to_csv(response["runs"], RUN_COLUMNS)
    return ""


def write(filepath, text):
    with open(filepath, "w") as file:
        file.write(text)
