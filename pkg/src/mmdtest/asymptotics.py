"""Limiting distributions under the min(nx, ny) scaling.

Null: min(nx, ny) * MMD^2_hat converges to (rho_x + rho_y) * sum_l
lambda_l (Z_l^2 - 1) with i.i.d. standard normal Z_l and the lambda_l
solving the centered-kernel integral equation; the eigenvalues are
estimated from the doubly centered Gram matrix of a null sample.

Alternative: sqrt(min(nx, ny)) * (MMD^2_hat - MMD^2) is asymptotically
N(0, 4 rho_x zeta_x + 4 rho_y zeta_y).

rho_x = lim min/nx and rho_y = lim min/ny; at least one equals 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ParameterError, ShapeError

__all__ = [
    "SpectralModel",
    "AltLimit",
    "group_ratios",
    "estimate_null_eigenvalues",
    "sample_null_limit",
    "null_quantile",
    "alt_limit",
    "power_approx",
    "normal_cdf",
]

EIGEN_ABS_FLOOR = 1e-10
EIGEN_REL_FLOOR = 1e-8
DEFAULT_L_MAX = 256

# Chunk length for limit sampling; each chunk gets its own RNG stream keyed
# by (seed, chunk index) so the output is identical however chunks are run.
_CHUNK = 8192


def group_ratios(nx: int, ny: int) -> tuple[float, float]:
    """(rho_x, rho_y) = (min/nx, min/ny); the smaller group gets ratio 1."""
    if nx < 1 or ny < 1:
        raise ParameterError(f"need nx, ny >= 1, got nx={nx}, ny={ny}")
    n = min(nx, ny)
    return n / nx, n / ny


@dataclass(frozen=True)
class SpectralModel:
    """Null limit (rho_x + rho_y) * sum_l eigenvalues[l] * (Z_l^2 - 1)."""

    eigenvalues: tuple[float, ...]
    rho_x: float
    rho_y: float

    def __post_init__(self):
        eigs = tuple(float(v) for v in self.eigenvalues)
        if any(not math.isfinite(v) or v < 0 for v in eigs):
            raise ParameterError("eigenvalues must be finite and nonnegative")
        if any(eigs[i] < eigs[i + 1] for i in range(len(eigs) - 1)):
            raise ParameterError("eigenvalues must be sorted descending")
        object.__setattr__(self, "eigenvalues", eigs)
        for name in ("rho_x", "rho_y"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {v}")
            object.__setattr__(self, name, v)
        if max(self.rho_x, self.rho_y) != 1.0:
            raise ParameterError("one of rho_x, rho_y must equal 1")

    def limit_variance(self) -> float:
        """Variance of the limit: (rho_x + rho_y)^2 * 2 sum lambda_l^2."""
        return (self.rho_x + self.rho_y) ** 2 * 2.0 * math.fsum(v * v for v in self.eigenvalues)

    def to_dict(self) -> dict:
        return {
            "eigenvalues": list(self.eigenvalues),
            "rho_x": self.rho_x,
            "rho_y": self.rho_y,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, payload: Mapping) -> "SpectralModel":
        return cls(
            eigenvalues=tuple(payload["eigenvalues"]),
            rho_x=payload["rho_x"],
            rho_y=payload["rho_y"],
        )

    @classmethod
    def from_json(cls, text: str) -> "SpectralModel":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class AltLimit:
    """Normal limit N(mean, variance / min(nx, ny)) in the original scale.

    variance 0 is allowed and represents a point mass at mean.
    """

    mean: float
    variance: float

    def __post_init__(self):
        if self.variance < 0 or not math.isfinite(self.variance):
            raise ParameterError(f"variance must be finite and >= 0, got {self.variance}")

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "variance": self.variance}


def estimate_null_eigenvalues(
    gram: np.ndarray, l_max: int = DEFAULT_L_MAX
) -> np.ndarray:
    """Spectrum estimate from one pooled null sample's Gram matrix.

    Returns the eigenvalues of H K H / n (H = I - 11^T/n), descending,
    keeping at most l_max values above max(1e-10, 1e-8 * largest).  The
    double centering realizes the (phi(x) - mu) recentering in the limit's
    integral equation; dividing by n makes the values estimate the integral
    operator's spectrum rather than grow with the sample.
    """
    k = np.asarray(gram, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ShapeError(f"gram matrix must be square, got shape {k.shape}")
    n = k.shape[0]
    if n < 2:
        raise ParameterError(f"need at least 2 samples, got {n}")
    if l_max < 1:
        raise ParameterError(f"l_max must be >= 1, got {l_max}")
    row = k.mean(axis=0)
    centered = k - row[None, :] - row[:, None] + row.mean()
    eigs = np.linalg.eigvalsh(centered / n)[::-1]
    eigs = np.clip(eigs, 0.0, None)
    if eigs.size == 0 or eigs[0] <= 0.0:
        return np.empty(0)
    keep = eigs > max(EIGEN_ABS_FLOOR, EIGEN_REL_FLOOR * eigs[0])
    return eigs[keep][:l_max].copy()


def sample_null_limit(model: SpectralModel, draws: int, seed: int) -> np.ndarray:
    """i.i.d. draws of the null limit, deterministic given seed.

    Draws are produced in fixed-size chunks, each from its own RNG stream
    keyed by (seed, chunk index), so any parallel execution over chunks
    yields the same output as the sequential loop.
    """
    if draws < 1:
        raise ParameterError(f"draws must be >= 1, got {draws}")
    lam = np.asarray(model.eigenvalues, dtype=float)
    out = np.zeros(draws)
    if lam.size == 0:
        return out
    scale = model.rho_x + model.rho_y
    for chunk, start in enumerate(range(0, draws, _CHUNK)):
        stop = min(start + _CHUNK, draws)
        rng = np.random.default_rng([seed, chunk])
        z = rng.standard_normal((stop - start, lam.size))
        out[start:stop] = scale * ((z * z - 1.0) @ lam)
    return out


def null_quantile(model: SpectralModel, alpha: float, draws: int, seed: int) -> float:
    """Empirical (1 - alpha) quantile of the sampled null limit.

    Order-statistic convention: the ceil((1 - alpha) * draws)-th smallest
    value (1-based), which is conservative for thresholding.
    """
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    values = np.sort(sample_null_limit(model, draws, seed))
    rank = max(math.ceil((1.0 - alpha) * draws), 1)
    return float(values[rank - 1])


def alt_limit(
    zeta_x: float, zeta_y: float, rho_x: float, rho_y: float, mmd_sq: float
) -> AltLimit:
    """Normal limit of sqrt(min) * (estimate - mmd_sq) under P != Q."""
    for name, v in (("zeta_x", zeta_x), ("zeta_y", zeta_y), ("mmd_sq", mmd_sq)):
        if v < 0:
            raise ParameterError(f"{name} must be nonnegative, got {v}")
    for name, v in (("rho_x", rho_x), ("rho_y", rho_y)):
        if not 0.0 <= v <= 1.0:
            raise ParameterError(f"{name} must lie in [0, 1], got {v}")
    return AltLimit(mean=mmd_sq, variance=4.0 * rho_x * zeta_x + 4.0 * rho_y * zeta_y)


def normal_cdf(t: float) -> float:
    return 0.5 * (1.0 + math.erf(t / math.sqrt(2.0)))


def power_approx(n: int, mmd_sq: float, sigma: float, c_alpha: float) -> float:
    """Asymptotic rejection probability Phi(sqrt(n) mmd_sq / sigma - c_alpha / (sqrt(n) sigma)).

    The signal-to-noise ratio mmd_sq / sigma dominates for large n, which is
    what the tuner maximizes.  Requires sigma > 0 (non-degenerate limit).
    """
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    root = math.sqrt(n)
    return normal_cdf(root * mmd_sq / sigma - c_alpha / (root * sigma))
