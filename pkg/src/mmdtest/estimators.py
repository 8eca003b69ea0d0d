"""Squared-MMD estimators and the bound on their gap.

Two estimators are provided.  ``mmd_unbiased`` works for any group sizes
nx, ny >= 2:

    2/(nx(nx-1)) sum_{i<j} k(x_i, x_j) + 2/(ny(ny-1)) sum_{i<j} k(y_i, y_j)
    - 2/(nx ny) sum_{i,j} k(x_i, y_j).

``mmd_ustat`` is the classical order-2 U-statistic over paired samples
z_i = (x_i, y_i), defined only for nx == ny; it differs from the unbiased
estimator exactly by how the cross-block diagonal is handled, and its value
depends on the pairing order of the two groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamplesError, PairingError, ParameterError
from .kernels import GramBlocks

__all__ = ["EstimatorValue", "mmd_unbiased", "mmd_ustat", "gap_bound"]


@dataclass(frozen=True)
class EstimatorValue:
    value: float
    kind: str  # "unbiased" or "ustat"
    nx: int
    ny: int

    def to_dict(self) -> dict:
        return {"value": self.value, "kind": self.kind, "nx": self.nx, "ny": self.ny}


def _offdiag_sum(block: np.ndarray) -> float:
    # per-row partial sums, then the total
    return float(np.sum(np.sum(block, axis=1) - np.diagonal(block)))


def _cross_sum_symmetric(kxy: np.ndarray) -> float:
    # average of the row-major and column-major totals; invariant under
    # transposition, which keeps mmd_unbiased exactly exchange-symmetric
    row_total = np.sum(np.sum(kxy, axis=1))
    col_total = np.sum(np.sum(kxy, axis=0))
    return float(0.5 * (row_total + col_total))


def mmd_unbiased(blocks: GramBlocks) -> EstimatorValue:
    """Unbiased squared-MMD estimate from precomputed Gram blocks."""
    nx, ny = blocks.nx, blocks.ny
    if nx < 2 or ny < 2:
        raise InsufficientSamplesError(f"need at least 2 samples per group, got nx={nx}, ny={ny}")
    sxx = _offdiag_sum(blocks.kxx)
    syy = _offdiag_sum(blocks.kyy)
    sxy = _cross_sum_symmetric(blocks.kxy)
    value = sxx / (nx * (nx - 1)) + syy / (ny * (ny - 1)) - 2.0 * sxy / (nx * ny)
    return EstimatorValue(float(value), "unbiased", nx, ny)


def mmd_ustat(blocks: GramBlocks) -> EstimatorValue:
    """Order-2 U-statistic estimate over paired samples; requires nx == ny.

    Pairs are taken in the given row order, so the value changes if one
    group is permuted relative to the other.
    """
    nx, ny = blocks.nx, blocks.ny
    if nx != ny:
        raise PairingError(f"paired U-statistic needs equal group sizes, got nx={nx}, ny={ny}")
    n = nx
    if n < 2:
        raise InsufficientSamplesError(f"need at least 2 pairs, got n={n}")
    sxx = _offdiag_sum(blocks.kxx)
    syy = _offdiag_sum(blocks.kyy)
    cross_total = float(np.sum(np.sum(blocks.kxy, axis=1)))
    cross_diag = float(np.sum(np.diagonal(blocks.kxy)))
    value = (sxx + syy - 2.0 * (cross_total - cross_diag)) / (n * (n - 1))
    return EstimatorValue(float(value), "ustat", n, n)


def gap_bound(kernel_sup: float, n: int, delta: float) -> float:
    """High-probability bound on |unbiased - paired-U| at equal group size n.

    With probability at least 1 - delta over paired samples,
    |gap| <= (8 sup_k / n^{3/2}) sqrt(log(2 / delta)).
    """
    if not kernel_sup >= 0:
        raise ParameterError(f"kernel_sup must be nonnegative, got {kernel_sup}")
    if n < 2:
        raise InsufficientSamplesError(f"need n >= 2, got {n}")
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    return 8.0 * kernel_sup / n**1.5 * math.sqrt(math.log(2.0 / delta))
