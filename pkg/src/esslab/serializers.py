"""CSV/JSON result files, the ``meta`` sidecar and long-format plot data.

Every float is written with 17 significant digits, so parsing a file gives back
the in-memory values exactly.
"""

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence, TextIO

import numpy as np

from .errors import PlanError
from .stats import SummaryStats

logger = logging.getLogger(__name__)

PLOT_COLUMNS = ("n", "statistic", "value", "ci_lo", "ci_hi")

SCHEMAS: dict[str, tuple[str, ...]] = {
    "ess": ("seed", "dist", "n", "trials", "mean_S1", "mean_S2", "stderr_S2", "P_exist_le2"),
    "ess3": (
        "seed", "dist", "n", "trials", "mean_S1", "mean_S2", "stderr_S2", "P_exist_le2",
        "mean_S3", "P_exist_le3",
    ),
    "hull": (
        "seed", "dist", "n", "trials", "E_V", "stderr_V", "E_V0", "stderr_V0",
        "P_V0_zero", "stderr_V0_zero", "P_V_eq_4", "stderr_V_eq_4",
    ),
    "gamma": (
        "seed", "dist", "n", "trials", "P_gamma", "stderr_gamma", "P_joint", "stderr_joint",
        "mu_from_gamma",
    ),
    "chenstein": (
        "seed", "dist", "n", "trials", "lambda", "b1", "b2", "bound", "bound_stderr",
        "empirical_l1",
    ),
    "fu": ("seed", "dist", "n", "pairs", "u", "F_U", "lemma5_check"),
    "exist": (
        "seed", "dist", "n", "trials", "P_pure", "stderr_pure", "P_two_point",
        "stderr_two_point", "P_le2", "stderr_le2",
    ),
    "sweep": ("seed", "dist", "n", "trials", "mu", "stderr_mu", "ci_lo", "ci_hi"),
}


def package_version() -> str:
    try:
        return version("esslab")
    except PackageNotFoundError:
        return "0+unknown"


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_value(value: Any):
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def _check_rows(rows: Sequence[Mapping[str, Any]], columns: Sequence[str]):
    for row in rows:
        missing = [column for column in columns if column not in row]
        if missing:
            raise PlanError(f"result row is missing columns {missing}")


def write_csv(rows: Sequence[Mapping[str, Any]], columns: Sequence[str], stream: TextIO):
    _check_rows(rows, columns)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[column]) for column in columns])


def write_json(rows: Sequence[Mapping[str, Any]], columns: Sequence[str], stream: TextIO):
    _check_rows(rows, columns)
    payload = [{column: _json_value(row[column]) for column in columns} for row in rows]
    json.dump(payload, stream, indent=2, allow_nan=True)
    stream.write("\n")


def render(rows: Sequence[Mapping[str, Any]], columns: Sequence[str], fmt: str) -> str:
    buffer = io.StringIO()
    if fmt == "csv":
        write_csv(rows, columns, buffer)
    elif fmt == "json":
        write_json(rows, columns, buffer)
    else:
        raise PlanError(f"unknown output format `{fmt}`")
    return buffer.getvalue()


def meta_path(out: Path) -> Path:
    return out.with_name(out.name + ".meta.json")


def write_results(
    rows: Sequence[Mapping[str, Any]],
    columns: Sequence[str],
    fmt: str,
    out: Path,
    config: Mapping[str, Any],
):
    """Write the results file and its ``meta`` sidecar; only the sidecar carries a timestamp."""
    out.write_text(render(rows, columns, fmt), encoding="utf-8")
    meta = {
        "created": datetime.now(timezone.utc).isoformat(),
        "version": package_version(),
        "config": {key: _json_value(value) for key, value in config.items()},
    }
    meta_path(out).write_text(json.dumps(meta, indent=2, default=str) + "\n", encoding="utf-8")
    logger.info("wrote %d rows to %s", len(rows), out)


@dataclass(frozen=True)
class PlotRecord:
    n: int
    statistic: str
    value: float
    ci_lo: float
    ci_hi: float


def plot_records(n: int, statistics: Mapping[str, SummaryStats]) -> list[PlotRecord]:
    return [
        PlotRecord(n, name, stats.mean, stats.ci_lo, stats.ci_hi)
        for name, stats in statistics.items()
    ]


def emit_plot_data(results: Iterable[PlotRecord], stream: TextIO):
    """Long-format plot data, sorted by (statistic, n)."""
    records = sorted(results, key=lambda record: (record.statistic, record.n))
    if not records:
        raise PlanError("no results to emit")
    write_csv([asdict(record) for record in records], PLOT_COLUMNS, stream)
    logger.info("wrote %d plot rows", len(records))


def read_plot_data(stream: TextIO) -> list[PlotRecord]:
    reader = csv.DictReader(stream)
    if tuple(reader.fieldnames or ()) != PLOT_COLUMNS:
        raise PlanError(f"plot data must have columns {PLOT_COLUMNS}, got {reader.fieldnames}")
    return [
        PlotRecord(
            int(row["n"]),
            row["statistic"],
            float(row["value"]),
            float(row["ci_lo"]),
            float(row["ci_hi"]),
        )
        for row in reader
    ]
