"""Headered CSV readers/writers shared by the CLI and pipelines.

Floats are written with repr() so every value round-trips exactly; files
use UTF-8 with LF line endings regardless of platform.
"""

import csv

import numpy as np

from .datasets import LabeledSeries


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def read_csv(path):
    """Returns (header, float64 array).  Empty files are an error."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"empty input file: {path}")
    header = rows[0]
    try:
        data = np.array([[float(v) for v in row] for row in rows[1:]],
                        dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"non-numeric cell in {path}: {exc}") from exc
    if data.size and data.shape[1] != len(header):
        raise ValueError(f"ragged rows in {path}")
    return header, data


def write_series_csv(series: LabeledSeries, path):
    """Feature columns x1..xd, then target columns y1..ym."""
    d = series.inputs.shape[1]
    m = series.targets.shape[1]
    header = [f"x{i + 1}" for i in range(d)] + [f"y{j + 1}" for j in range(m)]
    rows = np.concatenate([series.inputs, series.targets], axis=1)
    write_csv(path, header, rows)


def read_series_csv(path) -> LabeledSeries:
    header, data = read_csv(path)
    d = sum(1 for h in header if h.startswith("x"))
    m = sum(1 for h in header if h.startswith("y"))
    if d == 0 or m == 0 or d + m != len(header):
        raise ValueError(f"{path}: expected x1..xd then y1..ym columns")
    if data.size == 0:
        raise ValueError(f"{path}: no data rows")
    return LabeledSeries(data[:, :d], data[:, d:], {"source": str(path)})


def write_signal_csv(values, path):
    """Single 'value' column for ordered scalar series."""
    values = np.asarray(values, dtype=np.float64).ravel()
    write_csv(path, ["value"], values[:, None])


def read_signal_csv(path) -> np.ndarray:
    header, data = read_csv(path)
    if len(header) != 1:
        raise ValueError(f"{path}: expected a single 'value' column")
    if data.size == 0:
        raise ValueError(f"{path}: no data rows")
    return data[:, 0]
