"""CSV dataset loading with line-numbered errors."""

from __future__ import annotations

import csv

import numpy as np

from ..design_lab import unit_normalize_columns
from ..errors import CsvFormatError
from ..model_core import DesignMatrix


def _read_rows(path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file (a header row is required)") from None
        rows = [(reader.line_num, row) for row in reader if row]
    return header, rows


def _parse_float(cell: str, path, line: int, col: int) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise CsvFormatError(f"{path}:{line}: column {col + 1}: non-numeric cell {cell!r}") from None
    if not np.isfinite(v):
        raise CsvFormatError(f"{path}:{line}: column {col + 1}: non-finite value {cell!r}")
    return v


def load_features_csv(path, normalize: bool = False) -> tuple[DesignMatrix, np.ndarray | None]:
    """Returns the design and, when ``normalize``, the column norms used."""
    header, rows = _read_rows(path)
    width = len(header)
    data = np.empty((len(rows), width))
    for i, (line, row) in enumerate(rows):
        if len(row) != width:
            raise CsvFormatError(f"{path}:{line}: expected {width} fields, found {len(row)}")
        for j, cell in enumerate(row):
            data[i, j] = _parse_float(cell, path, line, j)
    X = DesignMatrix.from_array(data, [h.strip() for h in header])
    if not normalize:
        return X, None
    Z, norms = unit_normalize_columns(X)
    return DesignMatrix(Z.entries, Z.rank_r, True, X.feature_names), norms


def load_response_csv(path) -> np.ndarray:
    header, rows = _read_rows(path)
    if len(header) != 1:
        raise CsvFormatError(f"{path}:1: response file must have exactly one column")
    y = np.empty(len(rows))
    for i, (line, row) in enumerate(rows):
        if len(row) != 1:
            raise CsvFormatError(f"{path}:{line}: expected 1 field, found {len(row)}")
        v = _parse_float(row[0], path, line, 0)
        if v not in (0.0, 1.0):
            raise CsvFormatError(f"{path}:{line}: response must be 0 or 1, found {row[0]!r}")
        y[i] = v
    return y


def load_csv_dataset(path_features, path_response, normalize: bool = False):
    """Read a design CSV (header of feature names) and a single-column 0/1 response CSV.

    Returns ``(DesignMatrix, y)``; with ``normalize`` the columns are scaled to
    unit norm (use :func:`load_features_csv` to also get the scales).
    """
    X, _ = load_features_csv(path_features, normalize)
    y = load_response_csv(path_response)
    if X.n != y.shape[0]:
        raise CsvFormatError(f"row count mismatch: {path_features} has {X.n} rows, {path_response} has {y.shape[0]}")
    return X, y
