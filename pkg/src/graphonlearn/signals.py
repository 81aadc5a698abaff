"""Ingestion of real-world scalar signals from CSV files.

A signal is a time-ordered series of reals; it is mapped affinely onto [0, 1]
(and back) so the trajectory machinery applies unchanged.
"""

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, ParseError
from .sampling import Trajectory


@dataclass
class SignalSeries:
    """Raw signal values with their invertible min-max scaling."""

    values: np.ndarray
    name: str
    vmin: float
    vmax: float

    def scaled(self):
        return (self.values - self.vmin) / (self.vmax - self.vmin)

    def unscale(self, u):
        return np.asarray(u, dtype=float) * (self.vmax - self.vmin) + self.vmin

    def to_trajectory(self):
        return Trajectory(
            states=self.scaled(),
            seed=None,
            source={
                "kind": "signal",
                "name": self.name,
                "scale_min": self.vmin,
                "scale_max": self.vmax,
            },
            periodic=False,
        )


def _parse_float(text):
    try:
        return float(text)
    except (TypeError, ValueError):
        return None


def ingest_signal(path, column=0):
    """Read one numeric column of a CSV file, in order.

    ``column`` may be an index or a header name.  A non-numeric first row is
    treated as a header.  Later rows whose chosen field is missing or
    non-numeric are skipped with a warning listing their line numbers.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"signal file {path} does not exist")
    values = []
    rejected = []
    col_idx = None
    name = str(column)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if col_idx is None:
                if isinstance(column, int) or (isinstance(column, str) and column.isdigit()):
                    col_idx = int(column)
                    if col_idx >= len(row):
                        raise ParseError(
                            f"column index {col_idx} out of range for {len(row)} columns"
                        )
                    # a non-numeric first row is a header; use it for the name
                    if _parse_float(row[col_idx]) is None:
                        name = row[col_idx].strip()
                        continue
                else:
                    header = [cell.strip() for cell in row]
                    if column not in header:
                        raise ParseError(f"column {column!r} not found in header {header}")
                    col_idx = header.index(column)
                    name = column
                    continue
            if col_idx >= len(row):
                rejected.append(line_no)
                continue
            val = _parse_float(row[col_idx])
            if val is None:
                rejected.append(line_no)
            else:
                values.append(val)
    if rejected:
        warnings.warn(
            f"skipped {len(rejected)} non-numeric rows at lines {rejected[:20]}"
            + ("..." if len(rejected) > 20 else ""),
            stacklevel=2,
        )
    if len(values) < 10:
        raise ParseError(f"signal needs at least 10 numeric rows, found {len(values)}")
    arr = np.asarray(values, dtype=float)
    vmin, vmax = float(arr.min()), float(arr.max())
    if vmax <= vmin:
        raise DomainError("signal is constant; min-max scaling is not invertible")
    return SignalSeries(values=arr, name=name, vmin=vmin, vmax=vmax)
