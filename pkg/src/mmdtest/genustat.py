"""Generalized U-statistics over several independent sample groups.

A c-group U-statistic averages a block-symmetric kernel h over all ways of
picking m_j distinct arguments from group j.  Its exact variance is a
combinatorial mixture of the conditional-variance components

    zeta_{d_1 ... d_c} = Var( E[ h | first d_j arguments of each group ] ),

weighted by hypergeometric overlap counts:

    Var(U) = sum_d  prod_j  C(n_j, m_j)^{-1} C(m_j, d_j) C(n_j - m_j, m_j - d_j)
             * zeta_d.

The squared-MMD estimator is the two-group case with m = (2, 2); its zeta
table reduces to eight closed-form combinations of the population
functionals, implemented in ``mmd_zeta_table``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    EnumerationTooLargeError,
    IncompleteTableError,
    InsufficientSamplesError,
    ParameterError,
)
from .kernels import KernelSpec, eval_kernel
from .oracle import PopulationFunctionals

__all__ = [
    "GenUSpec",
    "ZetaTable",
    "gen_u_evaluate",
    "sen_variance",
    "degeneracy_order",
    "mmd_gen_u_spec",
    "mmd_zeta_table",
    "check_block_symmetry",
]

DEFAULT_EVAL_CAP = 10_000_000


@dataclass(frozen=True)
class GenUSpec:
    """A generalized U-statistic: group count, arguments per group, and kernel.

    h is called as h(block_1, ..., block_c) where block_j is a tuple of m_j
    sample rows; it must be symmetric under reordering within each block.
    """

    num_groups: int
    block_sizes: tuple[int, ...]
    h: Callable[..., float]

    def __post_init__(self):
        object.__setattr__(self, "block_sizes", tuple(int(m) for m in self.block_sizes))
        if self.num_groups < 1:
            raise ParameterError(f"need at least one group, got {self.num_groups}")
        if len(self.block_sizes) != self.num_groups:
            raise ParameterError(
                f"block_sizes has length {len(self.block_sizes)}, expected {self.num_groups}"
            )
        if any(m < 1 for m in self.block_sizes):
            raise ParameterError(f"block sizes must be >= 1, got {self.block_sizes}")


def _normalize_groups(spec: GenUSpec, groups: Sequence) -> list[np.ndarray]:
    if len(groups) != spec.num_groups:
        raise ParameterError(f"got {len(groups)} groups, spec declares {spec.num_groups}")
    out = []
    for j, g in enumerate(groups):
        arr = np.asarray(g, dtype=float)
        if arr.ndim not in (1, 2):
            raise ParameterError(f"group {j} must be a 1-D or 2-D array, got ndim={arr.ndim}")
        if arr.shape[0] < spec.block_sizes[j]:
            raise InsufficientSamplesError(
                f"group {j} has {arr.shape[0]} samples, kernel needs {spec.block_sizes[j]}"
            )
        out.append(arr)
    return out


def gen_u_evaluate(spec: GenUSpec, groups: Sequence, cap: int = DEFAULT_EVAL_CAP) -> float:
    """Exact U-statistic value by averaging h over all argument subsets.

    Because h is block-symmetric, averaging over unordered index subsets per
    group coincides with the average over ordered injections: each subset is
    visited m_j! times by the injections, and the multiplicity cancels
    against the normalizer.  One h evaluation is spent per subset
    combination; the total count prod_j C(n_j, m_j) must not exceed cap.
    """
    arrays = _normalize_groups(spec, groups)
    total = 1
    for arr, m in zip(arrays, spec.block_sizes):
        total *= math.comb(arr.shape[0], m)
    if total > cap:
        raise EnumerationTooLargeError(f"{total} kernel evaluations exceed cap {cap}")
    index_sets = [
        list(combinations(range(arr.shape[0]), m)) for arr, m in zip(arrays, spec.block_sizes)
    ]
    values = []
    for chosen in product(*index_sets):
        blocks = tuple(
            tuple(arr[i] for i in idxs) for arr, idxs in zip(arrays, chosen)
        )
        values.append(float(spec.h(*blocks)))
    return math.fsum(values) / total


def check_block_symmetry(
    spec: GenUSpec, groups: Sequence, trials: int = 8, seed: int = 0, rtol: float = 1e-9
) -> bool:
    """Spot-check that h is invariant to reordering within each block."""
    arrays = _normalize_groups(spec, groups)
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        blocks = []
        for arr, m in zip(arrays, spec.block_sizes):
            idxs = rng.choice(arr.shape[0], size=m, replace=False)
            blocks.append(tuple(arr[i] for i in idxs))
        reference = float(spec.h(*blocks))
        shuffled = [list(b) for b in blocks]
        j = int(rng.integers(spec.num_groups))
        rng.shuffle(shuffled[j])
        permuted = float(spec.h(*(tuple(b) for b in shuffled)))
        scale = max(abs(reference), abs(permuted), 1.0)
        if abs(reference - permuted) > rtol * scale:
            return False
    return True


@dataclass(frozen=True)
class ZetaTable:
    """Conditional-variance components zeta_d indexed by tuples d, 0 <= d_j <= m_j."""

    block_sizes: tuple[int, ...]
    values: Mapping[tuple[int, ...], float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "block_sizes", tuple(int(m) for m in self.block_sizes))
        values = {}
        for key, val in dict(self.values).items():
            key = tuple(int(d) for d in key)
            if len(key) != len(self.block_sizes) or any(
                d < 0 or d > m for d, m in zip(key, self.block_sizes)
            ):
                raise ParameterError(f"index {key} out of range for block sizes {self.block_sizes}")
            val = float(val)
            if val < -1e-12 or not math.isfinite(val):
                raise ParameterError(f"zeta value for {key} must be nonnegative, got {val}")
            values[key] = max(val, 0.0)
        zero = (0,) * len(self.block_sizes)
        if zero in values and values[zero] > 1e-12:
            raise ParameterError("zeta at the all-zero index is the variance of a constant and must be 0")
        values.setdefault(zero, 0.0)
        object.__setattr__(self, "values", values)

    def __getitem__(self, key: tuple[int, ...]) -> float:
        try:
            return self.values[tuple(key)]
        except KeyError:
            raise IncompleteTableError(f"zeta table is missing entry {tuple(key)}") from None

    def all_indices(self) -> list[tuple[int, ...]]:
        return [tuple(d) for d in product(*(range(m + 1) for m in self.block_sizes))]


def sen_variance(zetas: ZetaTable, sizes: Sequence[int]) -> float:
    """Exact variance of a generalized U-statistic from its zeta table.

    sizes are the per-group sample counts n_j; every index tuple with a
    nonzero hypergeometric weight must be present in the table.
    """
    sizes = tuple(int(n) for n in sizes)
    m = zetas.block_sizes
    if len(sizes) != len(m):
        raise ParameterError(f"got {len(sizes)} sizes for {len(m)} groups")
    if any(n < mj for n, mj in zip(sizes, m)):
        raise InsufficientSamplesError(f"sizes {sizes} too small for block sizes {m}")
    acc = []
    for d in product(*(range(mj + 1) for mj in m)):
        coeff = 1.0
        for nj, mj, dj in zip(sizes, m, d):
            coeff *= math.comb(mj, dj) * math.comb(nj - mj, mj - dj) / math.comb(nj, mj)
        if coeff == 0.0:
            continue
        acc.append(coeff * zetas[d])
    return math.fsum(acc)


def degeneracy_order(zetas: ZetaTable, tol: float = 1e-10):
    """Largest r such that every zeta_d with d_1 + ... + d_c <= r is below tol.

    Returns math.inf when the whole table vanishes.  Order 0 means some
    depth-1 component is active (the non-degenerate regime); order r >= 1
    means the variance decays at the n^-(r+1) rate.
    """
    if tol < 0:
        raise ParameterError(f"tol must be nonnegative, got {tol}")
    max_depth = sum(zetas.block_sizes)
    level_max = {s: 0.0 for s in range(max_depth + 1)}
    for d in zetas.all_indices():
        level_max[sum(d)] = max(level_max[sum(d)], zetas[d])
    if all(v <= tol for v in level_max.values()):
        return math.inf
    r = 0
    while r + 1 <= max_depth and level_max[r + 1] <= tol:
        r += 1
    return r


def mmd_gen_u_spec(kernel: KernelSpec) -> GenUSpec:
    """The squared-MMD estimator as a two-group generalized U-statistic.

    h((x1, x2), (y1, y2)) = k(x1,x2) + k(y1,y2)
                            - (k(x1,y2) + k(x2,y1) + k(x1,y1) + k(x2,y2)) / 2.
    """

    def h(xs, ys):
        x1, x2 = xs
        y1, y2 = ys
        return (
            eval_kernel(kernel, x1, x2)
            + eval_kernel(kernel, y1, y2)
            - 0.5
            * (
                eval_kernel(kernel, x1, y2)
                + eval_kernel(kernel, x2, y1)
                + eval_kernel(kernel, x1, y1)
                + eval_kernel(kernel, x2, y2)
            )
        )

    return GenUSpec(num_groups=2, block_sizes=(2, 2), h=h)


def mmd_zeta_table(f: PopulationFunctionals) -> ZetaTable:
    """Zeta table of the squared-MMD generalized U-statistic.

    All eight components are closed-form combinations of the population
    functionals; conditioning on more arguments only adds covariance-
    operator mass, which is why every entry below is a nonnegative mixture.
    """
    nu_p, nu_q = f.zeta_x, f.zeta_y
    values = {
        (0, 0): 0.0,
        (1, 0): nu_p,
        (0, 1): nu_q,
        (2, 0): f.hs_pp + 2.0 * nu_p,
        (0, 2): f.hs_qq + 2.0 * nu_q,
        (1, 1): nu_p + nu_q + 0.25 * f.hs_pq,
        (2, 1): f.hs_pp + 0.5 * f.hs_pq + 2.0 * nu_p + nu_q,
        (1, 2): f.hs_qq + 0.5 * f.hs_pq + nu_p + 2.0 * nu_q,
        (2, 2): f.hs_pp + f.hs_qq + f.hs_pq + 2.0 * nu_p + 2.0 * nu_q,
    }
    return ZetaTable(block_sizes=(2, 2), values=values)
