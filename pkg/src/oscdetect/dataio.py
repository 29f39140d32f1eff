"""CSV and JSON input/output for the command-line harness.

All numeric output goes through ``repr`` of Python floats (shortest
round-trip form), so identical results serialize to identical bytes.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import InputError

MIN_SERIES_LENGTH = 32


def read_csv(path) -> np.ndarray:
    """Read a single-column numeric CSV into a series.

    Accepts an optional single header cell ``value``. Rejects
    non-numeric cells (reporting the line number), NaN/inf rows, empty
    files, and series shorter than 32 samples.
    """
    values = []
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    start = 0
    if lines and lines[0].strip().lower() == "value":
        start = 1
    for lineno, raw in enumerate(lines[start:], start=start + 1):
        cell = raw.strip()
        if not cell:
            continue
        try:
            v = float(cell)
        except ValueError:
            raise InputError(
                f"{path}: non-numeric value {cell!r} at line {lineno}"
            ) from None
        if not math.isfinite(v):
            raise InputError(f"{path}: non-finite value at line {lineno}")
        values.append(v)
    if not values:
        raise InputError(f"{path}: no data rows")
    if len(values) < MIN_SERIES_LENGTH:
        raise InputError(
            f"{path}: series too short, n={len(values)} < {MIN_SERIES_LENGTH}"
        )
    return np.asarray(values, dtype=np.float64)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    f = float(v)
    if not math.isfinite(f):
        raise InputError("refusing to serialize non-finite value")
    return repr(f)


def write_series_csv(path, values) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("value\n")
        for v in np.asarray(values, dtype=np.float64):
            fh.write(_fmt(v) + "\n")


def write_columns_csv(path, header, columns) -> None:
    """RFC-4180-style CSV from equal-length columns, LF newlines."""
    cols = [np.asarray(c) for c in columns]
    if any(c.shape != cols[0].shape for c in cols):
        raise InputError("CSV columns must have equal length")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_matrix_csv(path, row_label, row_values, col_values, matrix) -> None:
    """Matrix CSV with a leading index column; header lists the columns."""
    matrix = np.asarray(matrix)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(row_label + "," + ",".join(_fmt(c) for c in col_values) + "\n")
        for r, row in zip(row_values, matrix):
            fh.write(_fmt(r) + "," + ",".join(_fmt(v) for v in row) + "\n")


def write_rows_csv(path, header, rows) -> None:
    """Per-record CSV from a list of dicts sharing the header's keys."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[k]) for k in header) + "\n")


def _check_finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        raise InputError("refusing to serialize non-finite JSON number")
    if isinstance(obj, dict):
        for v in obj.values():
            _check_finite(v)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            _check_finite(v)


def dump_json(obj, path=None) -> str:
    """Serialize with stable key order and strictly finite numbers."""
    _check_finite(obj)
    text = json.dumps(obj, indent=2, allow_nan=False) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
