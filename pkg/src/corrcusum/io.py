"""Delimited-text ingestion of price or return panels."""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import Panel
from .errors import InputError

__all__ = ["InputSpec", "ingest"]


@dataclass(frozen=True)
class InputSpec:
    """Where and how to read a panel.

    ``columns`` selects data columns by header label or by 0-based index
    among the data columns (a leading date column is not counted).
    """

    path: str
    mode: str = "returns"
    delimiter: str = ","
    has_header: bool = True
    columns: Optional[Sequence[str]] = field(default=None)


def _parse_float(s):
    try:
        v = float(s)
    except ValueError:
        return None
    return v


def ingest(spec: InputSpec) -> Panel:
    """Read ``spec.path`` into a :class:`Panel`.

    In ``prices`` mode each column is turned into log returns
    ``log(P_t / P_{t-1})``, so the panel has one row fewer than the file.
    A first column whose first data cell is not numeric is carried through
    as row labels (dates) and never parsed as data.
    """
    if spec.mode not in ("returns", "prices"):
        raise InputError(f"mode must be 'returns' or 'prices', got {spec.mode!r}")
    path = Path(spec.path)
    if not path.is_file():
        raise InputError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        rows = [(n, r) for n, r in enumerate(csv.reader(fh, delimiter=spec.delimiter), start=1)
                if any(c.strip() for c in r)]
    if not rows:
        raise InputError(f"{path}: no data")
    header = None
    if spec.has_header:
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    if not rows:
        raise InputError(f"{path}: no data rows")

    width = len(rows[0][1])
    for n, r in rows:
        if len(r) != width:
            raise InputError(f"{path}: line {n} has {len(r)} fields, expected {width}")
    if header is not None and len(header) != width:
        raise InputError(f"{path}: header has {len(header)} fields, data rows have {width}")

    has_dates = _parse_float(rows[0][1][0].strip()) is None
    first = 1 if has_dates else 0
    names = header[first:] if header is not None else [f"X{i + 1}" for i in range(width - first)]
    data_cols = list(range(first, width))

    if spec.columns:
        chosen = []
        for tok in spec.columns:
            tok = str(tok).strip()
            if tok in names:
                chosen.append(names.index(tok))
            elif tok.lstrip("-").isdigit() and 0 <= int(tok) < len(names):
                chosen.append(int(tok))
            else:
                raise InputError(f"unknown column {tok!r}; available: {', '.join(names)}")
    else:
        chosen = list(range(len(names)))
    if len(chosen) < 2:
        raise InputError("need at least 2 data columns")

    values = np.empty((len(rows), len(chosen)))
    for out_row, (n, r) in enumerate(rows):
        for out_col, c in enumerate(chosen):
            cell = r[data_cols[c]].strip()
            v = _parse_float(cell)
            if v is None or not math.isfinite(v):
                raise InputError(f"{path}: line {n}, column {names[c]!r}: bad value {cell!r}")
            values[out_row, out_col] = v
    row_labels = [r[0].strip() for _, r in rows] if has_dates else None

    if spec.mode == "prices":
        bad = np.argwhere(values <= 0)
        if bad.size:
            n = rows[bad[0, 0]][0]
            raise InputError(f"{path}: line {n}: prices must be strictly positive")
        values = np.diff(np.log(values), axis=0)
        if row_labels is not None:
            row_labels = row_labels[1:]
    if values.shape[0] < 3:
        raise InputError(f"{path}: need at least 3 usable rows, got {values.shape[0]}")
    return Panel(values, labels=[names[c] for c in chosen], row_labels=row_labels)
