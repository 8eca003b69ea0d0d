"""Headerless numeric CSV handling and reproducibility hashing.

Input files are plain matrices: rows are samples, comma-separated decimal
columns are features.  Written floats use repr, the shortest string that
round-trips exactly, so write -> read is the identity on values.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from .errors import DataError

__all__ = ["read_matrix_csv", "write_matrix_csv", "config_hash"]

PathLike = Union[str, Path]


def read_matrix_csv(path: PathLike) -> np.ndarray:
    """Parse a headerless CSV file into an (n, d) float matrix.

    Malformed cells, ragged rows, and non-finite values raise DataError
    naming the 1-based line; blank lines are rejected too, except trailing
    newlines at end of file.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: cannot read file: {exc}") from None
    lines = text.split("\n")
    while lines and lines[-1] == "":
        lines.pop()
    rows = []
    width = None
    for lineno, line in enumerate(lines, start=1):
        cells = line.split(",")
        if cells == [""]:
            raise DataError(f"{path}:{lineno}: blank line inside matrix")
        try:
            row = [float(c) for c in cells]
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric cell") from None
        if any(not math.isfinite(v) for v in row):
            raise DataError(f"{path}:{lineno}: non-finite value")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataError(
                f"{path}:{lineno}: expected {width} columns, found {len(row)}"
            )
        rows.append(row)
    if not rows:
        raise DataError(f"{path}: file contains no rows")
    return np.array(rows, dtype=float)


def write_matrix_csv(path: PathLike, matrix) -> None:
    """Write an (n, d) matrix as headerless CSV with exact round-trip."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise DataError(f"matrix must be 1- or 2-dimensional, got shape {m.shape}")
    with open(path, "w", encoding="utf-8") as fh:
        for row in m:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def config_hash(payload: Mapping) -> str:
    """sha256 over the canonical JSON encoding of a config mapping."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()
