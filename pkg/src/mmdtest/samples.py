"""Two-sample data container."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError


def _as_matrix(a, name: str) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be a 1-D or 2-D array, got ndim={arr.ndim}")
    if arr.shape[0] < 1:
        raise ShapeError(f"{name} must contain at least one sample")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{name} contains non-finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SampleSet:
    """Paired groups of observations, shapes (n_x, d) and (n_y, d).

    Arrays are copied and frozen at construction so a SampleSet can be
    shared across threads.  One-dimensional inputs are treated as single
    features.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _as_matrix(self.x, "x"))
        object.__setattr__(self, "y", _as_matrix(self.y, "y"))
        if self.x.shape[1] != self.y.shape[1]:
            raise ShapeError(
                f"x and y must share a feature dimension, got {self.x.shape[1]} and {self.y.shape[1]}"
            )

    @property
    def nx(self) -> int:
        return self.x.shape[0]

    @property
    def ny(self) -> int:
        return self.y.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def swapped(self) -> "SampleSet":
        return SampleSet(self.y, self.x)

    def pooled(self) -> np.ndarray:
        """Both groups stacked, x rows first."""
        return np.vstack([self.x, self.y])
