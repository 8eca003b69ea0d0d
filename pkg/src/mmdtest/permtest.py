"""Permutation two-sample test with exact finite-sample level control.

The pooled Gram matrix is computed once; each permutation only relabels
indices, so the permuted statistic is a sum-gather over cached entries.
With the add-one convention p = (1 + #{T_b >= T_obs}) / (1 + B), the test
is exactly level-alpha under exchangeability for any B >= 1.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InsufficientSamplesError, ParameterError
from .kernels import KernelSpec, gram_matrix
from .samples import SampleSet

__all__ = [
    "TestResult",
    "permutation_test",
    "RejectionCurveConfig",
    "CurvePoint",
    "rejection_rate",
]


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    threshold: float
    reject: bool
    alpha: float
    num_permutations: int
    seed: int
    nx: int
    ny: int

    def __post_init__(self):
        b = self.num_permutations
        if not (1.0 / (b + 1) <= self.p_value <= 1.0):
            raise ParameterError(f"p_value {self.p_value} outside [1/(B+1), 1]")
        if self.reject != (self.p_value <= self.alpha):
            raise ParameterError("reject flag inconsistent with p_value")

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "threshold": self.threshold,
            "reject": self.reject,
            "alpha": self.alpha,
            "num_permutations": self.num_permutations,
            "seed": self.seed,
            "nx": self.nx,
            "ny": self.ny,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _partition_statistic(
    pooled: np.ndarray,
    diag: np.ndarray,
    total: float,
    diag_total: float,
    small_idx: np.ndarray,
    n_small: int,
    n_other: int,
) -> float:
    # Row-gather over the smaller group: O(n_small * N) per permutation.
    v = pooled[small_idx].sum(axis=0)
    block_small = float(v[small_idx].sum())
    cross = float(v.sum()) - block_small
    block_other = total - block_small - 2.0 * cross
    diag_small = float(diag[small_idx].sum())
    off_small = block_small - diag_small
    off_other = block_other - (diag_total - diag_small)
    return (
        off_small / (n_small * (n_small - 1))
        + off_other / (n_other * (n_other - 1))
        - 2.0 * cross / (n_small * n_other)
    )


def permutation_test(
    samples: SampleSet,
    spec: KernelSpec,
    alpha: float = 0.05,
    permutations: int = 200,
    seed: int = 0,
    threads: int = 1,
) -> TestResult:
    """Two-sample test of P = Q via uniformly resampled group labelings.

    For b = 1..B the pooled indices are repartitioned into sizes (nx, ny)
    with the stream keyed by (seed, b); the statistic is the unbiased
    squared-MMD estimate under each labeling.  Deterministic for fixed seed
    whatever the thread count, since streams never depend on scheduling.
    Ties T_b = T_obs count against rejection, as exact level control needs.
    """
    nx, ny = samples.nx, samples.ny
    if nx < 2 or ny < 2:
        raise InsufficientSamplesError(f"need nx, ny >= 2, got nx={nx}, ny={ny}")
    if permutations < 1:
        raise ParameterError(f"permutations must be >= 1, got {permutations}")
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")

    pooled = gram_matrix(spec, samples.pooled())
    n_total = nx + ny
    diag = np.diagonal(pooled).copy()
    total = float(pooled.sum())
    diag_total = float(diag.sum())
    n_small = min(nx, ny)
    n_other = n_total - n_small

    def stat_for(idx: np.ndarray) -> float:
        return _partition_statistic(pooled, diag, total, diag_total, idx, n_small, n_other)

    identity_small = np.arange(nx) if nx <= ny else np.arange(nx, n_total)
    observed = stat_for(identity_small)

    def run_block(b_range: Sequence[int]) -> list[tuple[int, float]]:
        out = []
        for b in b_range:
            rng = np.random.default_rng([seed, b])
            perm = rng.permutation(n_total)
            small = perm[:nx] if nx <= ny else perm[nx:]
            out.append((b, stat_for(small)))
        return out

    permuted = np.empty(permutations)
    b_values = range(1, permutations + 1)
    if threads == 1:
        for b, value in run_block(b_values):
            permuted[b - 1] = value
    else:
        chunk = max(1, math.ceil(permutations / threads))
        blocks = [
            list(b_values[i : i + chunk]) for i in range(0, permutations, chunk)
        ]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for result in pool.map(run_block, blocks):
                for b, value in result:
                    permuted[b - 1] = value

    count_ge = int(np.sum(permuted >= observed))
    p_value = (1.0 + count_ge) / (1.0 + permutations)
    rank = math.ceil((1.0 - alpha) * (permutations + 1))
    if rank <= permutations:
        threshold = float(np.sort(permuted)[rank - 1])
    else:
        threshold = math.inf
    return TestResult(
        statistic=observed,
        p_value=p_value,
        threshold=threshold,
        reject=p_value <= alpha,
        alpha=alpha,
        num_permutations=permutations,
        seed=seed,
        nx=nx,
        ny=ny,
    )


@dataclass(frozen=True)
class RejectionCurveConfig:
    """Monte Carlo sweep: nx varies over nx_grid, ny stays fixed.

    sample_p and sample_q are callables (rng, n) -> (n, d) arrays and must
    be safe to call from multiple threads.
    """

    sample_p: Callable[[np.random.Generator, int], np.ndarray]
    sample_q: Callable[[np.random.Generator, int], np.ndarray]
    kernel: KernelSpec
    nx_grid: tuple[int, ...]
    ny: int
    alpha: float = 0.05
    permutations: int = 200
    reps: int = 2000
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "nx_grid", tuple(int(n) for n in self.nx_grid))
        if not self.nx_grid:
            raise ParameterError("nx_grid must be nonempty")
        if self.reps < 1:
            raise ParameterError(f"reps must be >= 1, got {self.reps}")
        if self.permutations < 1:
            raise ParameterError(f"permutations must be >= 1, got {self.permutations}")
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class CurvePoint:
    nx: int
    rate: float
    stderr: float

    def to_dict(self) -> dict:
        return {"nx": self.nx, "rate": self.rate, "stderr": self.stderr}


def rejection_rate(config: RejectionCurveConfig) -> tuple[CurvePoint, ...]:
    """Empirical rejection frequency with binomial standard error per nx.

    Each (grid point, replicate) pair owns a seed-derived stream for the
    data and an independent integer seed for the permutation test, so the
    whole curve is reproducible and replicates are independent.
    """
    points = []
    for i, nx in enumerate(config.nx_grid):
        rejected = 0
        for r in range(config.reps):
            data_ss, perm_ss = np.random.SeedSequence([config.seed, i, r]).spawn(2)
            rng = np.random.default_rng(data_ss)
            samples = SampleSet(
                config.sample_p(rng, nx), config.sample_q(rng, config.ny)
            )
            result = permutation_test(
                samples,
                config.kernel,
                alpha=config.alpha,
                permutations=config.permutations,
                seed=int(perm_ss.generate_state(1)[0]),
                threads=config.threads,
            )
            rejected += int(result.reject)
        rate = rejected / config.reps
        stderr = math.sqrt(rate * (1.0 - rate) / config.reps)
        points.append(CurvePoint(nx=nx, rate=rate, stderr=stderr))
    return tuple(points)
