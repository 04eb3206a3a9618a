"""CSV and JSON serialization with exact float round-trips.

Floats are written with 17 significant digits, enough to reproduce the
binary value bit-for-bit on re-read, so write-then-read is lossless and
rerunning a command produces byte-identical files.
"""

import csv
import json
from dataclasses import dataclass

import numpy as np

FLOAT_FMT = ".17g"


def fmt_float(x):
    return format(float(x), FLOAT_FMT)


@dataclass(frozen=True)
class PointFile:
    """Parsed CSV contents: coordinates plus optional weight/label columns."""

    points: np.ndarray
    weights: np.ndarray | None
    labels: np.ndarray | None
    had_header: bool


def _is_numeric_row(row):
    try:
        for cell in row:
            float(cell)
    except ValueError:
        return False
    return bool(row)


def read_points_csv(path):
    """Read a point table.

    With a header, columns named ``weight`` and ``label`` are split out
    and every other column is a coordinate (in file order).  Without a
    header every column is a coordinate.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValueError(f"{path}: no rows")
    header = None
    if not _is_numeric_row(rows[0]):
        header = [cell.strip().lower() for cell in rows[0]]
        rows = rows[1:]
        if not rows:
            raise ValueError(f"{path}: header but no data rows")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise ValueError(f"{path}: ragged rows (expected {width} columns everywhere)")
    try:
        values = np.array([[float(cell) for cell in row] for row in rows], dtype=np.float64)
    except ValueError as err:
        raise ValueError(f"{path}: non-numeric data cell ({err})") from None

    weights = None
    labels = None
    if header is not None:
        if len(header) != width:
            raise ValueError(f"{path}: header names {len(header)} columns, rows have {width}")
        coord_cols = []
        for idx, name in enumerate(header):
            if name == "weight":
                weights = values[:, idx]
            elif name == "label":
                labels = np.rint(values[:, idx]).astype(np.int64)
            else:
                coord_cols.append(idx)
        if not coord_cols:
            raise ValueError(f"{path}: no coordinate columns")
        points = values[:, coord_cols]
    else:
        points = values
    return PointFile(
        points=np.ascontiguousarray(points),
        weights=weights,
        labels=labels,
        had_header=header is not None,
    )


def write_points_csv(path, points, weights=None, labels=None, weight_name="weight"):
    """Write a point table with header ``x1..xd[,weight][,label]``."""
    pts = np.asarray(points, dtype=np.float64)
    header = [f"x{i + 1}" for i in range(pts.shape[1])]
    if weights is not None:
        header.append(weight_name)
    if labels is not None:
        header.append("label")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(pts.shape[0]):
            row = [fmt_float(v) for v in pts[i]]
            if weights is not None:
                row.append(fmt_float(weights[i]))
            if labels is not None:
                row.append(str(int(labels[i])))
            writer.writerow(row)


def write_plan_csv(path, plan, weights):
    """Write one row per sample: its index, assigned site, and weight."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "assignment", "weight"])
        for i, j in enumerate(plan.assignment):
            writer.writerow([str(i), str(int(j)), fmt_float(weights[i])])


def read_capacities_csv(path):
    """Read a one-column capacity table (optional single-cell header)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValueError(f"{path}: no rows")
    if not _is_numeric_row(rows[0]):
        rows = rows[1:]
    if any(len(row) != 1 for row in rows):
        raise ValueError(f"{path}: capacities must be a single column")
    try:
        return np.array([float(row[0]) for row in rows], dtype=np.float64)
    except ValueError as err:
        raise ValueError(f"{path}: non-numeric capacity ({err})") from None


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON-serializable: {type(obj).__name__}")


def write_json(path, payload):
    """Stable JSON: sorted keys, two-space indent, trailing newline."""
    text = json.dumps(payload, sort_keys=True, indent=2, default=_jsonable)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text + "\n")


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
