"""CSV time series, JSON summaries and snapshot files.

Floats are written with 17 significant digits so a write/read round trip
reproduces every binary64 value exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NS1DError
from .functionals import CSV_FIELDS, FunctionalRecord


class OutputError(NS1DError, OSError):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _open_for_write(path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", newline="")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def write_timeseries_csv(records, path):
    with _open_for_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for rec in records:
            writer.writerow([fmt(v) for v in rec.row()])


def read_timeseries_csv(path) -> list[FunctionalRecord]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != CSV_FIELDS:
                raise OutputError(f"{path}: unexpected header {header}")
            return [FunctionalRecord(*(float(v) for v in row)) for row in reader]
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc


def _jsonable(value):
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, (np.floating, np.integer)):
        return _jsonable(value.item())
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _unjson(value):
    if value == "nan":
        return math.nan
    if value == "inf":
        return math.inf
    if value == "-inf":
        return -math.inf
    return value


def summary_document(outcome, config_echo: dict) -> dict:
    measured = {k: float(v) for k, v in outcome.measured.items()}
    passed = bool(outcome.passed) and not any(math.isnan(v) for v in measured.values())
    return {
        "name": outcome.name,
        "pass": passed,
        "measured": _jsonable(measured),
        "config": _jsonable(config_echo),
        "artifact_paths": [str(a) for a in outcome.artifacts],
        "tool_version": __version__,
    }


def write_summary_json(outcome, config_echo: dict, path):
    """Single JSON document; any NaN in ``measured`` forces ``pass: false``."""
    doc = summary_document(outcome, config_echo)
    with _open_for_write(path) as fh:
        json.dump(doc, fh, indent=2, allow_nan=False)
        fh.write("\n")
    return doc


def read_summary_json(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc
    doc["measured"] = {k: _unjson(v) for k, v in doc["measured"].items()}
    return doc


def write_snapshot(state, grid, path):
    """Three columns ``x rho u`` under a ``# t=<time>`` header."""
    with _open_for_write(path) as fh:
        fh.write(f"# t={fmt(state.t)}\n")
        for x, r, u in zip(grid.x, state.rho, state.u):
            fh.write(f"{fmt(x)} {fmt(r)} {fmt(u)}\n")


def read_snapshot(path):
    with open(path) as fh:
        header = fh.readline()
    if not header.startswith("# t="):
        raise OutputError(f"{path}: missing '# t=' header")
    data = np.loadtxt(path, comments="#", ndmin=2)
    return float(header[4:]), data[:, 0], data[:, 1], data[:, 2]


def snapshot_name(t: float) -> str:
    return f"snapshot_{fmt(t)}.txt"
