"""Price matrices and per-period log returns."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DataError


@dataclass(frozen=True)
class ReturnsMatrix:
    values: np.ndarray
    symbols: tuple | None = None
    dates: tuple | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise DataError(f"returns must be a T x d matrix, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DataError("returns contain non-finite entries")
        if self.symbols is not None and len(self.symbols) != v.shape[1]:
            raise DataError("number of symbols does not match the number of columns")
        if self.dates is not None and len(self.dates) != v.shape[0]:
            raise DataError("number of dates does not match the number of rows")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def compute_log_returns(prices, symbols=None, dates=None) -> ReturnsMatrix:
    """Row ``t`` of the output is ``log(p[t+1] / p[t])``.

    ``dates`` (if given) label the price rows; each return takes the date of
    the later price.
    """
    p = np.asarray(prices, dtype=np.float64)
    if p.ndim == 1:
        p = p.reshape(-1, 1)
    if p.shape[0] < 2:
        raise DataError("need at least two price rows")
    bad = np.argwhere(~(p > 0))
    if bad.size:
        r, c = bad[0]
        raise DataError(f"nonpositive or missing price at row {r + 1}, column {c + 1}: {float(p[r, c])!r}")
    ret = np.log(p[1:] / p[:-1])
    return ReturnsMatrix(ret, symbols, None if dates is None else tuple(dates[1:]))


def read_prices_csv(path, dates=False, header=None):
    """Read a price matrix.

    ``dates`` marks the first column as a row label. ``header=None``
    detects a symbol header from a non-numeric first row.
    Returns ``(prices, symbols, dates)``.
    """
    with open(Path(path), newline="") as fh:
        records = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not records:
        raise DataError(f"{path}: empty file")
    if header is None:
        cells = records[0][1:] if dates else records[0]
        header = not all(_is_float(c) for c in cells)
    symbols = None
    if header:
        names = records[0][1:] if dates else records[0]
        symbols = tuple(s.strip() for s in names)
        records = records[1:]
    labels = [] if dates else None
    rows = []
    offset = 2 if header else 1
    for i, rec in enumerate(records):
        if dates:
            labels.append(rec[0])
            rec = rec[1:]
        row = []
        for j, cell in enumerate(rec):
            try:
                row.append(float(cell))
            except ValueError:
                col = j + (2 if dates else 1)
                raise DataError(f"{path}: row {i + offset}, column {col}: cannot parse {cell!r}") from None
        if rows and len(row) != len(rows[0]):
            raise DataError(f"{path}: row {i + offset} has {len(row)} price columns, expected {len(rows[0])}")
        rows.append(row)
    return np.array(rows), symbols, None if labels is None else tuple(labels)


def _is_float(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def write_returns_csv(returns: ReturnsMatrix, dest):
    """Write returns to a path or an open text stream."""
    if hasattr(dest, "write"):
        _write_returns(returns, dest)
    else:
        with open(Path(dest), "w", newline="") as fh:
            _write_returns(returns, fh)


def _write_returns(returns, fh):
    w = csv.writer(fh, lineterminator="\n")
    if returns.symbols is not None:
        w.writerow((["date"] if returns.dates is not None else []) + list(returns.symbols))
    for t, row in enumerate(returns.values):
        cells = [repr(float(x)) for x in row]
        if returns.dates is not None:
            cells = [returns.dates[t]] + cells
        w.writerow(cells)
