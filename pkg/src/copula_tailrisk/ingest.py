"""CSV ingestion for paired measurements.

Policy for cell contents:

* blank-like tokens (empty, ``NA``, ``NaN``, ``.``, ``null``, ``None``) and
  non-finite numbers mark the row as missing; the row is dropped and counted;
* any other text that does not parse as a number is malformed. With
  ``strict=True`` that is an error, otherwise the row is dropped and
  counted separately.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "InputError",
    "UnreadableInputError",
    "MissingColumnError",
    "MalformedValueError",
    "InsufficientDataError",
    "InputTable",
    "ingest_csv",
    "MIN_FIT_ROWS",
]

MIN_FIT_ROWS = 10
_BLANK = {"", "na", "nan", "n/a", ".", "null", "none"}


class InputError(Exception):
    """Problem with user-supplied input data."""


class UnreadableInputError(InputError):
    pass


class MissingColumnError(InputError):
    pass


class MalformedValueError(InputError):
    pass


class InsufficientDataError(InputError):
    pass


@dataclass
class InputTable:
    x: np.ndarray
    y: np.ndarray
    provenance: str
    columns: tuple[str, str]
    ids: list[str] | None = None
    dropped_missing: int = 0
    dropped_malformed: int = 0
    warnings: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.x)


def _parse_cell(text: str) -> float | None:
    """Float value, ``None`` for missing, raises ValueError when malformed."""
    token = text.strip()
    if token.lower() in _BLANK:
        return None
    value = float(token)
    return value if math.isfinite(value) else None


def ingest_csv(
    path: str | Path,
    columns: tuple[str, str] = ("x", "y"),
    id_column: str | None = None,
    strict: bool = False,
    min_rows: int = MIN_FIT_ROWS,
) -> InputTable:
    """Read two numeric columns from a UTF-8 CSV with a header row."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8-sig") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise UnreadableInputError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise UnreadableInputError(f"{path} is empty")

    header = [h.strip() for h in rows[0]]
    wanted = list(columns) + ([id_column] if id_column else [])
    missing = [c for c in wanted if c not in header]
    if missing:
        raise MissingColumnError(f"{path} lacks column(s) {', '.join(missing)}; header is {header}")
    ix, iy = header.index(columns[0]), header.index(columns[1])
    iid = header.index(id_column) if id_column else None

    xs, ys, ids = [], [], []
    dropped_missing = dropped_malformed = 0
    for lineno, row in enumerate(rows[1:], start=2):
        if not any(cell.strip() for cell in row):
            continue
        row = row + [""] * (len(header) - len(row))
        try:
            x = _parse_cell(row[ix])
            y = _parse_cell(row[iy])
        except ValueError:
            if strict:
                raise MalformedValueError(
                    f"{path}:{lineno}: non-numeric value in {columns[0]!r}/{columns[1]!r}: {row[ix]!r}, {row[iy]!r}"
                ) from None
            dropped_malformed += 1
            continue
        if x is None or y is None:
            dropped_missing += 1
            continue
        xs.append(x)
        ys.append(y)
        if iid is not None:
            ids.append(row[iid].strip())

    table = InputTable(
        x=np.array(xs, dtype=float),
        y=np.array(ys, dtype=float),
        provenance=str(path),
        columns=(columns[0], columns[1]),
        ids=ids if iid is not None else None,
        dropped_missing=dropped_missing,
        dropped_malformed=dropped_malformed,
    )
    if dropped_malformed:
        table.warnings.append(f"dropped {dropped_malformed} row(s) with malformed values")
    if table.n < min_rows:
        raise InsufficientDataError(f"{path}: only {table.n} complete row(s) after cleaning; need at least {min_rows}")
    return table
