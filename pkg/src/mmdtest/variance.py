"""Closed-form finite-sample variances and data-driven variance estimates.

The exact variance of the unbiased estimator at group sizes nx, ny >= 2 is

    4 zeta_x / nx + 4 zeta_y / ny
    + 2 ||C_P||^2 / (nx(nx-1)) + 2 ||C_Q||^2 / (ny(ny-1))
    + 4 <C_P, C_Q> / (nx ny).

The first two terms are the 1/n-order contribution; the rest decay at the
1/n^2 rate and dominate in the degenerate regimes.  Each prefactor is an
exact integer ratio, and the whole formula is verified against tuple
enumeration (see the oracle module and the variance tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamplesError, ParameterError
from .kernels import GramBlocks
from .oracle import PopulationFunctionals

__all__ = [
    "VarianceReport",
    "ustat_variance",
    "mmd_ustat_variance",
    "mmd_unbiased_variance",
    "plugin_zetas",
    "sigma_hat",
]


@dataclass(frozen=True)
class VarianceReport:
    """Variance summary for the unbiased estimator at given group sizes.

    leading     the 1/n-order contribution 4 zeta_x / nx + 4 zeta_y / ny
    total       the full closed-form variance
    zeta_hat_x  the zeta_x value the report was built from
    zeta_hat_y  the zeta_y value the report was built from
    sigma_hat   sqrt(4 rho_x zeta_x + 4 rho_y zeta_y), rho_* = min(nx,ny)/n_*
    """

    leading: float
    total: float
    zeta_hat_x: float
    zeta_hat_y: float
    sigma_hat: float

    def to_dict(self) -> dict:
        return {
            "leading": self.leading,
            "total": self.total,
            "zeta_hat_x": self.zeta_hat_x,
            "zeta_hat_y": self.zeta_hat_y,
            "sigma_hat": self.sigma_hat,
        }


def _check_sizes(nx: int, ny: int) -> None:
    if nx < 2 or ny < 2:
        raise InsufficientSamplesError(f"need nx, ny >= 2, got nx={nx}, ny={ny}")


def ustat_variance(sigma1_sq_quarter: float, var_h: float, n: int) -> float:
    """Variance of an order-2 U-statistic with kernel h over n samples.

    sigma1_sq_quarter is Var_{Z1}[E_{Z2} h(Z1, Z2)]; var_h is Var[h(Z1, Z2)].
    """
    if n < 2:
        raise InsufficientSamplesError(f"need n >= 2, got {n}")
    if sigma1_sq_quarter < 0 or var_h < 0:
        raise ParameterError("variance components must be nonnegative")
    return (4.0 * (n - 2)) / (n * (n - 1)) * sigma1_sq_quarter + 2.0 / (n * (n - 1)) * var_h


def mmd_ustat_variance(f: PopulationFunctionals, n: int) -> float:
    """Exact variance of the paired U-statistic estimator at equal size n."""
    if n < 2:
        raise InsufficientSamplesError(f"need n >= 2, got {n}")
    nu = f.zeta_x + f.zeta_y
    hs_sum_sq = f.hs_pp + f.hs_qq + 2.0 * f.hs_pq  # ||C_P + C_Q||^2
    return (4.0 / n) * nu + (2.0 / (n * (n - 1))) * hs_sum_sq


def _unbiased_variance_terms(f: PopulationFunctionals, nx: int, ny: int) -> list[float]:
    return [
        (4.0 / nx) * f.zeta_x,
        (4.0 / ny) * f.zeta_y,
        (2.0 / (nx * (nx - 1))) * f.hs_pp,
        (2.0 / (ny * (ny - 1))) * f.hs_qq,
        (4.0 / (nx * ny)) * f.hs_pq,
    ]


def mmd_unbiased_variance(f: PopulationFunctionals, nx: int, ny: int) -> VarianceReport:
    """Exact variance of the unbiased estimator at any group sizes nx, ny >= 2."""
    _check_sizes(nx, ny)
    terms = _unbiased_variance_terms(f, nx, ny)
    total = math.fsum(terms)
    leading = 4.0 * f.zeta_x / nx + 4.0 * f.zeta_y / ny
    return VarianceReport(
        leading=leading,
        total=total,
        zeta_hat_x=f.zeta_x,
        zeta_hat_y=f.zeta_y,
        sigma_hat=sigma_hat(f.zeta_x, f.zeta_y, nx, ny),
    )


def plugin_zetas(blocks: GramBlocks) -> tuple[float, float]:
    """Plug-in estimates of (zeta_x, zeta_y) from Gram blocks.

    Every expectation is replaced by a sample mean with the biased (1/m)
    normalizer:

      zeta_hat_x = Var_i[mean_j Kxx_ij] + Var_i[mean_j Kxy_ij]
                   - 2 Cov_i(mean_j Kxx_ij, mean_j Kxy_ij),

    which is the empirical variance of the per-row difference of block
    means; zeta_hat_y uses Kyy rows and Kxy columns.  Both estimates are
    nonnegative up to rounding and invariant to within-group reordering.
    """
    m, n = blocks.nx, blocks.ny
    row_xx = np.mean(blocks.kxx, axis=1)
    row_xy = np.mean(blocks.kxy, axis=1)
    var_xx = float(np.mean(row_xx**2) - np.mean(row_xx) ** 2)
    var_xy = float(np.mean(row_xy**2) - np.mean(row_xy) ** 2)
    cov_x = float(np.mean(row_xx * row_xy) - np.mean(row_xx) * np.mean(row_xy))
    zeta_x = var_xx + var_xy - 2.0 * cov_x

    row_yy = np.mean(blocks.kyy, axis=1)
    col_xy = np.mean(blocks.kxy, axis=0)
    var_yy = float(np.mean(row_yy**2) - np.mean(row_yy) ** 2)
    var_yx = float(np.mean(col_xy**2) - np.mean(col_xy) ** 2)
    cov_y = float(np.mean(row_yy * col_xy) - np.mean(row_yy) * np.mean(col_xy))
    zeta_y = var_yy + var_yx - 2.0 * cov_y
    return zeta_x, zeta_y


def sigma_hat(zeta_x: float, zeta_y: float, nx: int, ny: int) -> float:
    """Asymptotic standard deviation sqrt(4 rho_x zeta_x + 4 rho_y zeta_y).

    rho_x = min(nx, ny)/nx and rho_y = min(nx, ny)/ny.  A negative radicand
    (possible with noisy plug-in inputs) is clamped to zero.
    """
    _check_sizes(nx, ny)
    n = min(nx, ny)
    radicand = 4.0 * (n / nx) * zeta_x + 4.0 * (n / ny) * zeta_y
    return math.sqrt(max(radicand, 0.0))
