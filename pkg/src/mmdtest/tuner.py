"""Kernel selection by maximizing the estimated signal-to-noise ratio.

The objective is mmd_unbiased / (sigma_hat + lambda); its maximizer
approximately maximizes asymptotic test power, since the rejection
probability is monotone in sqrt(n) MMD^2 / sigma.  Tuning happens on a
training split only; the held-out half is reserved for the actual test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InsufficientSamplesError, ParameterError
from .estimators import mmd_unbiased
from .kernels import FAMILIES, KernelSpec, gram_blocks
from .samples import SampleSet
from .variance import plugin_zetas, sigma_hat

__all__ = [
    "TuneConfig",
    "TuneResult",
    "snr_objective",
    "split_samples",
    "tune",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TuneConfig:
    family: str = "gaussian"
    param_grid: Mapping[str, Sequence[float]] = field(default_factory=dict)
    lambda_reg: float = 1e-8
    refine_steps: int = 12
    train_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown kernel family {self.family!r}")
        grid = {name: tuple(float(v) for v in vals) for name, vals in dict(self.param_grid).items()}
        object.__setattr__(self, "param_grid", grid)
        if self.family == "gaussian":
            if set(grid) != {"lengthscale"} or not grid["lengthscale"]:
                raise ParameterError("gaussian tuning needs a nonempty 'lengthscale' grid")
            ls = grid["lengthscale"]
            if any(v <= 0 for v in ls):
                raise ParameterError("lengthscale grid values must be positive")
            if any(ls[i] >= ls[i + 1] for i in range(len(ls) - 1)):
                raise ParameterError("lengthscale grid must be strictly increasing")
        elif grid:
            raise ParameterError(f"family {self.family!r} takes no parameters")
        if self.lambda_reg <= 0:
            raise ParameterError(f"lambda_reg must be positive, got {self.lambda_reg}")
        if self.refine_steps < 0:
            raise ParameterError(f"refine_steps must be >= 0, got {self.refine_steps}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ParameterError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "param_grid": {k: list(v) for k, v in self.param_grid.items()},
            "lambda_reg": self.lambda_reg,
            "refine_steps": self.refine_steps,
            "train_fraction": self.train_fraction,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class TuneResult:
    best_spec: KernelSpec
    objective: float
    trace: tuple[tuple[KernelSpec, float], ...]

    def to_dict(self) -> dict:
        return {
            "best_spec": self.best_spec.to_dict(),
            "objective": self.objective,
            "trace": [[spec.to_dict(), value] for spec, value in self.trace],
        }


def snr_objective(samples: SampleSet, spec: KernelSpec, lambda_reg: float) -> float:
    """mmd_unbiased / (sigma_hat + lambda_reg) on the given samples.

    sigma_hat is the plug-in asymptotic standard deviation at these group
    sizes; lambda_reg > 0 keeps the ratio defined when it vanishes.
    """
    if lambda_reg <= 0:
        raise ParameterError(f"lambda_reg must be positive, got {lambda_reg}")
    blocks = gram_blocks(spec, samples)
    value = mmd_unbiased(blocks).value
    zx, zy = plugin_zetas(blocks)
    return value / (sigma_hat(zx, zy, samples.nx, samples.ny) + lambda_reg)


def split_samples(
    samples: SampleSet, train_fraction: float, seed: int
) -> tuple[SampleSet, SampleSet]:
    """Seeded disjoint (train, holdout) split, shuffling each group once.

    Group g is permuted by the stream keyed by (seed, g); the first
    floor(train_fraction * n) rows go to training.  Both halves of both
    groups must keep >= 2 rows.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ParameterError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    parts = []
    for g, block in enumerate((samples.x, samples.y)):
        n = block.shape[0]
        k = int(train_fraction * n)
        if k < 2 or n - k < 2:
            raise InsufficientSamplesError(
                f"split leaves {k} train / {n - k} holdout rows in group {g}; need >= 2 each"
            )
        perm = np.random.default_rng([seed, g]).permutation(n)
        parts.append((block[perm[:k]], block[perm[k:]]))
    (x_tr, x_ho), (y_tr, y_ho) = parts
    return SampleSet(x_tr, y_tr), SampleSet(x_ho, y_ho)


def _best_entry(trace: Sequence[tuple[KernelSpec, float]]) -> tuple[KernelSpec, float]:
    # Ties break toward the smaller lengthscale (or earlier entry).
    def sort_key(item):
        spec, value = item
        param = spec.params.get("lengthscale", 0.0)
        return (-value, param)

    return min(trace, key=sort_key)


def tune(samples: SampleSet, config: TuneConfig) -> TuneResult:
    """Grid search plus golden-section refinement of the SNR objective.

    Parameterless families return their single spec.  For the gaussian
    family the grid is scanned first; refine_steps golden-section
    evaluations then shrink the log-lengthscale bracket around the grid
    argmax.  Every evaluation lands in the trace, grid points first.
    """
    train, _ = split_samples(samples, config.train_fraction, config.seed)

    def evaluate(spec: KernelSpec) -> float:
        return snr_objective(train, spec, config.lambda_reg)

    if config.family != "gaussian":
        spec = KernelSpec(config.family)
        value = evaluate(spec)
        return TuneResult(best_spec=spec, objective=value, trace=((spec, value),))

    grid = config.param_grid["lengthscale"]
    trace = []
    for ls in grid:
        spec = KernelSpec("gaussian", {"lengthscale": ls})
        trace.append((spec, evaluate(spec)))

    best_idx = max(range(len(grid)), key=lambda i: (trace[i][1], -grid[i]))
    lo = grid[max(best_idx - 1, 0)]
    hi = grid[min(best_idx + 1, len(grid) - 1)]

    if config.refine_steps > 0 and lo < hi:
        a, b = math.log(lo), math.log(hi)

        def probe(t: float) -> float:
            spec = KernelSpec("gaussian", {"lengthscale": math.exp(t)})
            value = evaluate(spec)
            trace.append((spec, value))
            return value

        c = b - _INVPHI * (b - a)
        d = a + _INVPHI * (b - a)
        fc, fd = probe(c), probe(d)
        for _ in range(config.refine_steps):
            if fc >= fd:  # keep the left bracket on ties: smaller lengthscale
                b, d, fd = d, c, fc
                c = b - _INVPHI * (b - a)
                fc = probe(c)
            else:
                a, c, fc = c, d, fd
                d = a + _INVPHI * (b - a)
                fd = probe(d)

    best_spec, objective = _best_entry(trace)
    return TuneResult(best_spec=best_spec, objective=objective, trace=tuple(trace))
