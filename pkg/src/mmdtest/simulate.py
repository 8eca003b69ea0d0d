"""Seeded Monte Carlo harness used by the CLI simulations and the tests."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .asymptotics import normal_cdf
from .errors import ParameterError
from .estimators import mmd_unbiased, mmd_ustat
from .kernels import KernelSpec, gram_blocks
from .samples import SampleSet

__all__ = [
    "normal_sampler",
    "laplace_sampler",
    "replicate_mmd",
    "ks_two_sample",
    "ks_one_sample",
    "ks_to_normal",
    "qq_pairs",
]

Sampler = Callable[[np.random.Generator, int], np.ndarray]


def normal_sampler(mean: float = 0.0, std: float = 1.0) -> Sampler:
    if std <= 0:
        raise ParameterError(f"std must be positive, got {std}")

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.normal(mean, std, size=(n, 1))

    return draw


def laplace_sampler(loc: float = 0.0, scale: float = 1.0) -> Sampler:
    """Laplace with density exp(-|x - loc| / scale) / (2 scale); var 2 scale^2."""
    if scale <= 0:
        raise ParameterError(f"scale must be positive, got {scale}")

    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.laplace(loc, scale, size=(n, 1))

    return draw


def replicate_mmd(
    sample_p: Sampler,
    sample_q: Sampler,
    nx: int,
    ny: int,
    spec: KernelSpec,
    reps: int,
    seed: int,
    kind: str = "unbiased",
    threads: int = 1,
) -> np.ndarray:
    """reps independent draws of the chosen estimator at sizes (nx, ny).

    Replicate r uses the stream keyed by (seed, r), so any thread layout
    returns the identical array.
    """
    if reps < 1:
        raise ParameterError(f"reps must be >= 1, got {reps}")
    if kind not in ("unbiased", "ustat"):
        raise ParameterError(f"kind must be 'unbiased' or 'ustat', got {kind!r}")
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")
    estimator = mmd_unbiased if kind == "unbiased" else mmd_ustat

    def one(r: int) -> float:
        rng = np.random.default_rng([seed, r])
        samples = SampleSet(sample_p(rng, nx), sample_q(rng, ny))
        return estimator(gram_blocks(spec, samples)).value

    out = np.empty(reps)
    if threads == 1:
        for r in range(reps):
            out[r] = one(r)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for r, value in enumerate(pool.map(one, range(reps))):
                out[r] = value
    return out


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> float:
    """sup_t |F_a(t) - F_b(t)| over the pooled sample points."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ParameterError("both samples must be nonempty")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_one_sample(values: Sequence[float], cdf: Callable[[float], float]) -> float:
    """sup_t |F_n(t) - F(t)| against a continuous cdf."""
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if n == 0:
        raise ParameterError("values must be nonempty")
    f = np.array([cdf(t) for t in v])
    steps = np.arange(1, n + 1) / n
    return float(max(np.max(steps - f), np.max(f - (steps - 1.0 / n))))


def ks_to_normal(values: Sequence[float], mean: float, sd: float) -> float:
    if sd <= 0:
        raise ParameterError(f"sd must be positive, got {sd}")
    return ks_one_sample(values, lambda t: normal_cdf((t - mean) / sd))


def qq_pairs(sample: Sequence[float], reference: Sequence[float], num: int = 99) -> np.ndarray:
    """(num, 2) array of matched quantiles at levels (i - 1/2) / num."""
    if num < 1:
        raise ParameterError(f"num must be >= 1, got {num}")
    levels = (np.arange(num) + 0.5) / num
    emp = np.quantile(np.asarray(sample, dtype=float), levels)
    ref = np.quantile(np.asarray(reference, dtype=float), levels)
    return np.column_stack([emp, ref])
