"""Parsers for the drift-recover CSV formats.

Field CSV: a "nx,ny" header line, the dimensions, an "i,j,x,y,value" column
line, then one node line per grid point.  Convergence CSV: "k,increment,
rel_err" with empty cells where a series is undefined.  Parsed here from
scratch so this package depends only on the documented file formats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class CsvFormatError(ValueError):
    """Input file does not follow the documented CSV layout."""

    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = str(path)
        self.lineno = lineno


@dataclass(frozen=True)
class FieldData:
    """Nodal values of one scalar field on a uniform unit-square grid."""

    nx: int
    ny: int
    values: np.ndarray  # shape (ny, nx), row j = height y_j

    @property
    def extent(self):
        return (0.0, 1.0, 0.0, 1.0)


def read_field(path) -> FieldData:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    rows = [(n, ln.strip()) for n, ln in enumerate(lines, start=1) if ln.strip()]
    if len(rows) < 3:
        raise CsvFormatError(path, len(rows), "truncated field CSV")
    if rows[0][1] != "nx,ny":
        raise CsvFormatError(path, rows[0][0], f"expected 'nx,ny' header, got {rows[0][1]!r}")
    try:
        nx, ny = (int(tok) for tok in rows[1][1].split(","))
    except ValueError:
        raise CsvFormatError(path, rows[1][0], f"bad dimensions line {rows[1][1]!r}") from None
    if nx < 2 or ny < 2:
        raise CsvFormatError(path, rows[1][0], f"grid {nx}x{ny} too small to plot")
    if rows[2][1] != "i,j,x,y,value":
        raise CsvFormatError(path, rows[2][0], f"expected column line, got {rows[2][1]!r}")
    values = np.full((ny, nx), np.nan)
    for lineno, line in rows[3:]:
        toks = line.split(",")
        if len(toks) != 5:
            raise CsvFormatError(path, lineno, f"expected 5 fields, got {len(toks)}")
        try:
            i, j, v = int(toks[0]), int(toks[1]), float(toks[4])
        except ValueError:
            raise CsvFormatError(path, lineno, f"unparseable node line {line!r}") from None
        if not (0 <= i < nx and 0 <= j < ny):
            raise CsvFormatError(path, lineno, f"node ({i},{j}) outside {nx}x{ny} grid")
        values[j, i] = v
    if np.isnan(values).any():
        missing = int(np.isnan(values).sum())
        raise CsvFormatError(path, len(lines), f"{missing} grid nodes have no data line")
    return FieldData(nx=nx, ny=ny, values=values)


@dataclass(frozen=True)
class ConvergenceData:
    """Iteration series: increments and (optionally) relative errors by k."""

    k: np.ndarray
    increment: np.ndarray  # NaN where the cell was empty
    rel_err: np.ndarray


def read_convergence(path) -> ConvergenceData:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh.read().splitlines()]
    rows = [(n, ln) for n, ln in enumerate(lines, start=1) if ln]
    if not rows:
        raise CsvFormatError(path, 1, "empty convergence CSV")
    header = rows[0][1].split(",")
    required = ["k", "increment", "rel_err"]
    if header != required:
        missing = [c for c in required if c not in header]
        what = f"missing columns {missing}" if missing else f"unexpected columns {header}"
        raise CsvFormatError(path, rows[0][0], what)
    ks, incs, rels = [], [], []
    for lineno, line in rows[1:]:
        toks = line.split(",")
        if len(toks) != 3:
            raise CsvFormatError(path, lineno, f"expected 3 fields, got {len(toks)}")
        try:
            ks.append(int(toks[0]))
            incs.append(float(toks[1]) if toks[1] else np.nan)
            rels.append(float(toks[2]) if toks[2] else np.nan)
        except ValueError:
            raise CsvFormatError(path, lineno, f"unparseable row {line!r}") from None
    if not ks:
        raise CsvFormatError(path, rows[0][0], "convergence CSV has a header but no rows")
    return ConvergenceData(k=np.array(ks), increment=np.array(incs), rel_err=np.array(rels))
