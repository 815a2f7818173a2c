"""Result table and its text serializations."""

import csv
import io
import json
import math
from collections import OrderedDict
from dataclasses import astuple, dataclass, field
from typing import Dict, List, Tuple

COLUMNS = ("sweep_value", "metric", "estimate", "ci_lo", "ci_hi", "n", "seed")

# Metrics whose x-axis is a realized-SINR bin rather than the sweep parameter.
BINNED_METRICS = ("outage_vs_sinr",)


def metric_key(name: str, mode: str, scenario: str) -> str:
    """Qualified metric name, e.g. ``outage_probability@STF/indoor``."""
    return f"{name}@{mode}/{scenario}"


def split_metric_key(key: str) -> Tuple[str, str]:
    """Split a qualified metric into (name, series)."""
    name, _, series = key.partition("@")
    return name, series


@dataclass(frozen=True)
class ResultRow:
    sweep_value: float
    metric: str
    estimate: float
    ci_lo: float
    ci_hi: float
    n: int
    seed: int

    def __post_init__(self):
        # numpy scalars would leak their repr into the text formats
        for name, kind in (("sweep_value", float), ("estimate", float), ("ci_lo", float),
                           ("ci_hi", float), ("n", int), ("seed", int), ("metric", str)):
            object.__setattr__(self, name, kind(getattr(self, name)))


@dataclass
class ResultTable:
    """Aggregated metrics of one experiment, one row per (sweep point, metric)."""

    rows: List[ResultRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def append(self, row: ResultRow) -> None:
        self.rows.append(row)

    def extend(self, rows) -> None:
        self.rows.extend(rows)

    def metrics(self) -> List[str]:
        return list(OrderedDict.fromkeys(row.metric for row in self.rows))

    def select(self, metric: str) -> List[ResultRow]:
        return [row for row in self.rows if row.metric == metric]

    def series(self) -> Dict[str, List[ResultRow]]:
        """Rows on the sweep axis grouped by (mode, scenario) series."""
        grouped: Dict[str, List[ResultRow]] = OrderedDict()
        for row in self.rows:
            name, series = split_metric_key(row.metric)
            if name in BINNED_METRICS:
                continue
            grouped.setdefault(series, []).append(row)
        return grouped

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(value) for value in astuple(row)])
        return buffer.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if tuple(header) != COLUMNS:
            raise ValueError(f"unexpected CSV header: {header}")
        return cls([_parse_row(values) for values in reader if values])

    def to_json(self) -> str:
        """JSON records; non-finite floats are written as the strings "inf", "-inf" and "nan"."""
        records = [{k: _json_value(v) for k, v in zip(COLUMNS, astuple(row))} for row in self.rows]
        return json.dumps(records, indent=2, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "ResultTable":
        # ResultRow coerces the string sentinels back through float()
        return cls([ResultRow(**{k: record[k] for k in COLUMNS}) for record in json.loads(text)])

    def to_plotdata(self) -> str:
        """
        Whitespace-delimited blocks, one per (mode, scenario) series.

        Blocks are separated by two blank lines so plotting tools can index them.
        """
        blocks = []
        for series, rows in self.series().items():
            names = list(OrderedDict.fromkeys(split_metric_key(r.metric)[0] for r in rows))
            table: Dict[float, Dict[str, float]] = OrderedDict()
            for row in rows:
                table.setdefault(row.sweep_value, {})[split_metric_key(row.metric)[0]] = row.estimate
            lines = [f"# series {series}", "# sweep_value " + " ".join(names)]
            for value, estimates in table.items():
                cells = [_fmt(estimates.get(name, float("nan"))) for name in names]
                lines.append(" ".join([_fmt(value)] + cells))
            blocks.append("\n".join(lines))
        return "\n\n\n".join(blocks) + "\n"


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def _parse_row(values: List[str]) -> ResultRow:
    sweep, metric, est, lo, hi, n, seed = values
    return ResultRow(float(sweep), metric, float(est), float(lo), float(hi), int(n), int(seed))
