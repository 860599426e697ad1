"""Reading and writing numeric datasets, plus min-max scaling."""

from __future__ import annotations

import math
import os
from collections.abc import Iterator

import numpy as np


class DataFormatError(ValueError):
    """A dataset file that cannot be parsed; names the offending location."""

    def __init__(self, path, line: int | None, message: str, column: int | None = None):
        where = f"{path}"
        if line is not None:
            where += f", line {line}"
        if column is not None:
            where += f", column {column}"
        super().__init__(f"{where}: {message}")
        self.path = str(path)
        self.line = line
        self.column = column


def _split(line: str, comma: bool) -> list[str]:
    if comma:
        return [tok.strip() for tok in line.split(",")]
    return line.split()


def iter_rows(path, skip_header: bool = False) -> Iterator[np.ndarray]:
    """Yield rows of a comma- or whitespace-separated numeric file.

    The delimiter is sniffed from the first data line. Blank lines and lines
    starting with ``#`` are ignored.
    """
    width = None
    comma = None
    header_pending = skip_header
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if header_pending:
                header_pending = False
                continue
            if comma is None:
                comma = "," in line
            tokens = _split(line, comma)
            if width is None:
                width = len(tokens)
            elif len(tokens) != width:
                raise DataFormatError(path, lineno, f"expected {width} columns, found {len(tokens)}")
            row = np.empty(width)
            for col, tok in enumerate(tokens, start=1):
                try:
                    value = float(tok)
                except ValueError:
                    raise DataFormatError(path, lineno, f"cannot parse {tok!r} as a number", col) from None
                if not math.isfinite(value):
                    raise DataFormatError(path, lineno, f"non-finite value {tok!r}", col)
                row[col - 1] = value
            yield row


def load_dataset(path, skip_header: bool = False) -> np.ndarray:
    rows = list(iter_rows(path, skip_header))
    if not rows:
        raise DataFormatError(path, None, "file contains no data rows")
    return np.vstack(rows)


def load_tsplib(path) -> np.ndarray:
    """Node coordinates from a TSPLIB ``.tsp`` file (index column dropped)."""
    coords = []
    in_section = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not in_section:
                in_section = line.upper().startswith("NODE_COORD_SECTION")
                continue
            if not line or line.upper() == "EOF":
                break
            tokens = line.split()
            try:
                coords.append([float(t) for t in tokens[1:]])
            except ValueError:
                raise DataFormatError(path, lineno, f"bad coordinate line {line!r}") from None
            if len(coords[-1]) != len(coords[0]):
                raise DataFormatError(path, lineno, "ragged coordinate line")
    if not coords:
        raise DataFormatError(path, None, "no NODE_COORD_SECTION data found")
    return np.array(coords)


def load_any(path, skip_header: bool = False) -> np.ndarray:
    if os.fspath(path).lower().endswith(".tsp"):
        return load_tsplib(path)
    return load_dataset(path, skip_header)


def save_dataset(X, path, delimiter: str = ",") -> None:
    """Write ``X`` so that :func:`load_dataset` reads back identical doubles."""
    X = np.asarray(X, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        for row in np.atleast_2d(X):
            fh.write(delimiter.join(repr(float(v)) for v in row))
            fh.write("\n")


def minmax_normalize(X) -> np.ndarray:
    """Scale each column to [0, 1]; constant columns become 0."""
    X = np.asarray(X, dtype=np.float64)
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    out = np.zeros_like(X)
    ok = span > 0
    out[:, ok] = (X[:, ok] - lo[ok]) / span[ok]
    return out
