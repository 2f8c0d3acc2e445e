"""Experiment reports and their CSV / JSON encodings.

JSON layout::

    {"experiment": ..., "parameters": {...}, "seed": ..., "rows": [...], "summary": {...}}

The CSV encoding holds one row per record under a header line; the
remaining fields travel as a JSON object on a leading ``#`` comment line.
Floats are written with ``repr`` so both encodings round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMATS = ("json", "csv")

_INT_RE = re.compile(r"^[+-]?\d+$")


def _clean(value):
    """Convert numpy scalars/arrays to plain Python values, recursively."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def _cell_out(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, dict)):
        return json.dumps(value)
    return str(value)


def _cell_in(text):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    if _INT_RE.match(text):
        return int(text)
    if text[0] in "[{":
        return json.loads(text)
    try:
        return float(text)
    except ValueError:
        return text


@dataclass
class ExperimentReport:
    experiment: str
    parameters: dict = field(default_factory=dict)
    seed: int | None = None
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        self.parameters = _clean(self.parameters)
        self.rows = [_clean(r) for r in self.rows]
        self.summary = _clean(self.summary)
        self.seed = None if self.seed is None else int(self.seed)

    def columns(self) -> list[str]:
        cols = []
        for row in self.rows:
            for key in row:
                if key not in cols:
                    cols.append(key)
        return cols

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "parameters": self.parameters,
            "seed": self.seed,
            "rows": self.rows,
            "summary": self.summary,
        }

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text) -> "ExperimentReport":
        d = json.loads(text)
        return cls(d["experiment"], d.get("parameters", {}), d.get("seed"), d.get("rows", []), d.get("summary", {}))

    def to_csv(self) -> str:
        buf = io.StringIO()
        meta = {k: v for k, v in self.to_dict().items() if k != "rows"}
        buf.write("# " + json.dumps(meta) + "\n")
        cols = self.columns()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in self.rows:
            writer.writerow([_cell_out(row.get(c)) for c in cols])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text) -> "ExperimentReport":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# "):
            raise ValueError("report CSV must start with a '# {...}' metadata line")
        meta = json.loads(lines[0][2:])
        reader = csv.reader(lines[1:])
        header = next(reader, [])
        rows = [{c: _cell_in(v) for c, v in zip(header, rec)} for rec in reader if rec]
        return cls(meta["experiment"], meta.get("parameters", {}), meta.get("seed"), rows, meta.get("summary", {}))

    def dumps(self, fmt="json") -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")

    def save(self, path, fmt=None):
        path = Path(path)
        fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "json")
        path.write_text(self.dumps(fmt))

    @classmethod
    def load(cls, path) -> "ExperimentReport":
        text = Path(path).read_text()
        return cls.from_csv(text) if text.startswith("# ") else cls.from_json(text)
