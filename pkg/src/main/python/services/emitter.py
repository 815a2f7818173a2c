"""Result emission in CSV, JSON and plot-ready text."""

import logging
from pathlib import Path

from ..core.exceptions import ConfigurationError, ContractViolation, OutputError
from ..models import ResultTable

logger = logging.getLogger(__name__)

FORMATS = {
    "csv": ".csv",
    "json": ".json",
    "plotdata": ".dat",
}


def render(table: ResultTable, fmt: str) -> str:
    if fmt == "csv":
        return table.to_csv()
    if fmt == "json":
        return table.to_json()
    if fmt == "plotdata":
        return table.to_plotdata()
    raise ConfigurationError(f"unknown output format {fmt!r} (expected one of {sorted(FORMATS)})")


def default_filename(fmt: str, stem: str = "results") -> str:
    if fmt not in FORMATS:
        raise ConfigurationError(f"unknown output format {fmt!r} (expected one of {sorted(FORMATS)})")
    return stem + FORMATS[fmt]


def emit_results(table: ResultTable, fmt: str, path) -> Path:
    """
    Write a result table to disk.

    Args:
        table: Non-empty result table
        fmt: "csv", "json" or "plotdata"
        path: Output file; parent directories are created

    Returns:
        The written path

    Raises:
        OutputError: when the file cannot be written
    """
    if not len(table):
        raise ContractViolation("refusing to emit an empty result table")
    text = render(table, fmt)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as e:
        raise OutputError(path, e.strerror or str(e)) from e
    logger.info(f"Wrote {len(table)} rows to {path}")
    return path


def parse_results(text: str, fmt: str) -> ResultTable:
    """Inverse of render for the tabular formats."""
    if fmt == "csv":
        return ResultTable.from_csv(text)
    if fmt == "json":
        return ResultTable.from_json(text)
    raise ConfigurationError(f"cannot parse {fmt!r} results (csv and json only)")


def read_results(path, fmt: str = None) -> ResultTable:
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".")
    return parse_results(path.read_text(), fmt)
