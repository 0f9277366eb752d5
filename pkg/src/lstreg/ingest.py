"""Loading regression datasets from delimited text files.

Columns are referenced either by 1-based position or, when the file has a
header line, by name.  Cells that are empty or read ``NA``/``NaN``/``?``
count as missing.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .core import Dataset
from .errors import ContractViolation, FormatError, ParseError

Column = Union[int, str]
MISSING = {"", "na", "nan", "?", "null"}
DELIMITERS = {"comma": ",", "tab": "\t", "whitespace": None}


@dataclass(frozen=True)
class ColumnSpec:
    response: Column = 1
    predictors: Optional[tuple[Column, ...]] = None
    skip_header: bool = False

    def __post_init__(self):
        if self.predictors is not None:
            object.__setattr__(self, "predictors", tuple(self.predictors))
            if self.response in self.predictors:
                raise ContractViolation("the response column is also listed as a predictor")


@dataclass
class LoadReport:
    dropped: int = 0
    delimiter: str = ""


def parse_column(token: str) -> Column:
    token = token.strip()
    return int(token) if token.isdigit() else token


def parse_columns(text: str) -> tuple[Column, ...]:
    """``"2-8"``, ``"2,3,5"`` or ``"age,bmi"`` into a column list."""
    out: list[Column] = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"(\d+)-(\d+)", part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(parse_column(part))
    return tuple(out)


def sniff_delimiter(lines: Sequence[str]) -> str:
    sample = [ln for ln in lines if ln.strip()][:20]
    if not sample:
        return "whitespace"
    if all("," in ln for ln in sample):
        return "comma"
    if all("\t" in ln for ln in sample):
        return "tab"
    return "whitespace"


def _split(lines: Sequence[str], delimiter: str) -> list[list[str]]:
    if DELIMITERS[delimiter] is None:
        return [ln.split() for ln in lines if ln.strip()]
    rows = csv.reader([ln for ln in lines if ln.strip()], delimiter=DELIMITERS[delimiter])
    return [[c.strip() for c in row] for row in rows]


def _resolve(col: Column, header: Optional[list[str]], width: int) -> int:
    if isinstance(col, int):
        if not 1 <= col <= width:
            raise FormatError(f"column {col} does not exist (file has {width} columns)")
        return col - 1
    if header is None:
        raise FormatError(f"column name {col!r} needs a header line (skip_header)")
    try:
        return header.index(col)
    except ValueError:
        raise FormatError(f"no column named {col!r} in header {header}") from None


def load_csv(path, spec: ColumnSpec = ColumnSpec(), delimiter: Optional[str] = None,
             drop_incomplete: bool = False, report: Optional[LoadReport] = None) -> Dataset:
    """Read the columns named by ``spec`` into a :class:`Dataset`.

    ``delimiter`` is ``"comma"``, ``"tab"`` or ``"whitespace"``; it is
    guessed from the first lines when omitted.  Row order is preserved.
    Rows with a missing referenced cell raise :class:`ParseError` unless
    ``drop_incomplete`` is set, in which case they are skipped and counted
    in ``report.dropped``.
    """
    text = Path(path).read_text()
    lines = text.splitlines()
    if delimiter is None:
        delimiter = sniff_delimiter(lines)
    elif delimiter not in DELIMITERS:
        raise FormatError(f"unknown delimiter {delimiter!r}; use one of {sorted(DELIMITERS)}")
    rows = _split(lines, delimiter)
    if not rows:
        raise FormatError(f"{path}: file is empty")
    header = None
    first_line = 1
    if spec.skip_header:
        header, rows = rows[0], rows[1:]
        first_line = 2
    if not rows:
        raise FormatError(f"{path}: no data rows")
    width = len(header) if header is not None else len(rows[0])
    for k, row in enumerate(rows):
        if len(row) != width:
            raise FormatError(
                f"{path}: line {k + first_line} has {len(row)} fields, expected {width}")

    resp = _resolve(spec.response, header, width)
    if spec.predictors is None:
        preds = [c for c in range(width) if c != resp]
    else:
        preds = [_resolve(c, header, width) for c in spec.predictors]
    if resp in preds:
        raise ContractViolation("the response column is also listed as a predictor")
    if not preds:
        raise FormatError("no predictor columns selected")

    cols = [resp] + preds
    values = []
    dropped = 0
    for k, row in enumerate(rows):
        line = k + first_line
        rec = []
        for c in cols:
            cell = row[c]
            if cell.lower() in MISSING:
                rec = None
                break
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"{path}: line {line}, column {c + 1}: "
                                 f"cannot parse {cell!r} as a number",
                                 row=line, column=c + 1) from None
            if not math.isfinite(v):
                raise ParseError(f"{path}: line {line}, column {c + 1}: non-finite value",
                                 row=line, column=c + 1)
            rec.append(v)
        if rec is None:
            if not drop_incomplete:
                raise ParseError(f"{path}: line {line} has a missing value",
                                 row=line, column=c + 1)
            dropped += 1
            continue
        values.append(rec)
    if report is not None:
        report.dropped = dropped
        report.delimiter = delimiter
    if not values:
        raise FormatError(f"{path}: every row was incomplete")
    a = np.array(values)
    return Dataset(a[:, 1:], a[:, 0])


def save_csv(d: Dataset, path, header: bool = True) -> None:
    """Write ``y`` then the predictors; ``load_csv`` with defaults reads it back."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow(["y"] + [f"x{j + 1}" for j in range(d.p - 1)])
        for xi, yi in zip(d.X, d.y):
            w.writerow([repr(float(yi))] + [repr(float(v)) for v in xi])
