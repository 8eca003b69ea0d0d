"""Exact population quantities for finite discrete distributions.

For distributions with finite support every population functional of the
kernel embedding is a finite sum, and the exact sampling moments of both
squared-MMD estimators can be obtained by enumerating all sample tuples.
This module is the ground truth that the closed-form variance formulas are
verified against; it shares no code path with those formulas.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Mapping, NamedTuple

import numpy as np

from .errors import (
    DistributionError,
    EnumerationTooLargeError,
    PairingError,
    ParameterError,
)
from .kernels import KernelSpec, gram_matrix

__all__ = [
    "DiscreteDistribution",
    "PopulationFunctionals",
    "Degeneracy",
    "Moments",
    "population_functionals",
    "covariance_quadratic_form",
    "classify_degeneracy",
    "brute_force_moments",
]

DEFAULT_DEGENERACY_TOL = 1e-10
DEFAULT_ENUMERATION_CAP = 10_000_000


@dataclass(frozen=True)
class DiscreteDistribution:
    """A finitely supported distribution: distinct support rows plus weights."""

    support: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        support = np.array(self.support, dtype=float, copy=True)
        if support.ndim == 1:
            support = support.reshape(-1, 1)
        if support.ndim != 2 or support.shape[0] < 1:
            raise DistributionError(f"support must be a non-empty 2-D array, got {np.shape(self.support)}")
        if not np.all(np.isfinite(support)):
            raise DistributionError("support contains non-finite values")
        probs = np.array(self.probs, dtype=float, copy=True).reshape(-1)
        if probs.shape[0] != support.shape[0]:
            raise DistributionError(
                f"got {probs.shape[0]} probabilities for {support.shape[0]} support points"
            )
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise DistributionError("probabilities must be finite and nonnegative")
        if abs(float(probs.sum()) - 1.0) > 1e-12:
            raise DistributionError(f"probabilities must sum to 1, got {probs.sum()!r}")
        if len({tuple(row) for row in support}) != support.shape[0]:
            raise DistributionError("support rows must be distinct")
        support.flags.writeable = False
        probs.flags.writeable = False
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @property
    def size(self) -> int:
        return self.support.shape[0]

    @property
    def dim(self) -> int:
        return self.support.shape[1]

    @classmethod
    def uniform(cls, points) -> "DiscreteDistribution":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        m = pts.shape[0]
        return cls(pts, np.full(m, 1.0 / m))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        idx = rng.choice(self.size, size=n, p=self.probs)
        return self.support[idx]

    def to_dict(self) -> dict:
        return {"support": self.support.tolist(), "probs": self.probs.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, payload: Mapping) -> "DiscreteDistribution":
        try:
            return cls(np.asarray(payload["support"], dtype=float), np.asarray(payload["probs"], dtype=float))
        except (KeyError, TypeError) as exc:
            raise DistributionError(f"distribution payload needs 'support' and 'probs': {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "DiscreteDistribution":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DistributionError(f"invalid distribution JSON: {exc}") from None
        return cls.from_dict(payload)


@dataclass(frozen=True)
class PopulationFunctionals:
    """Population quantities of a pair (P, Q) under a fixed kernel.

    mmd_sq      squared MMD between P and Q
    zeta_x      Var_{X~P}[(mu_P - mu_Q)(X)], the first-order variance component of P
    zeta_y      Var_{Y~Q}[(mu_P - mu_Q)(Y)]
    hs_pp       squared Hilbert-Schmidt norm of the covariance operator of P
    hs_qq       same for Q
    hs_pq       Hilbert-Schmidt inner product of the two covariance operators
    mu_cp_mu    Var_{X~P}[mu_P(X)]  (quadratic form of mu_P in C_P)
    mu_cq_mu    Var_{Y~Q}[mu_Q(Y)]
    """

    mmd_sq: float
    zeta_x: float
    zeta_y: float
    hs_pp: float
    hs_qq: float
    hs_pq: float
    mu_cp_mu: float
    mu_cq_mu: float

    def to_dict(self) -> dict:
        return {
            "mmd_sq": self.mmd_sq,
            "zeta_x": self.zeta_x,
            "zeta_y": self.zeta_y,
            "hs_pp": self.hs_pp,
            "hs_qq": self.hs_qq,
            "hs_pq": self.hs_pq,
            "mu_cp_mu": self.mu_cp_mu,
            "mu_cq_mu": self.mu_cq_mu,
        }


class Degeneracy(Enum):
    NON_DEGENERATE = "non_degenerate"
    FIRST_ORDER = "first_order"
    INFINITELY_DEGENERATE = "infinitely_degenerate"


class Moments(NamedTuple):
    mean: float
    variance: float


def _weighted_var(values: np.ndarray, weights: np.ndarray) -> float:
    mean = float(weights @ values)
    return max(float(weights @ (values - mean) ** 2), 0.0)


def population_functionals(
    p: DiscreteDistribution, q: DiscreteDistribution, spec: KernelSpec
) -> PopulationFunctionals:
    """Evaluate all population functionals by exact finite sums over the supports."""
    if p.dim != q.dim:
        raise DistributionError(f"support dimensions differ: {p.dim} vs {q.dim}")
    kpp = gram_matrix(spec, p.support)
    kqq = gram_matrix(spec, q.support)
    kpq = gram_matrix(spec, p.support, q.support)
    wp, wq = p.probs, q.probs

    # mean-embedding values on each support
    mu_p_on_p = kpp @ wp
    mu_p_on_q = kpq.T @ wp
    mu_q_on_p = kpq @ wq
    mu_q_on_q = kqq @ wq

    m_pp = float(wp @ mu_p_on_p)  # E k(X, X') = <mu_P, mu_P>
    m_qq = float(wq @ mu_q_on_q)
    m_pq = float(wp @ (kpq @ wq))  # <mu_P, mu_Q>

    mmd_sq = max(m_pp + m_qq - 2.0 * m_pq, 0.0)
    zeta_x = _weighted_var(mu_p_on_p - mu_q_on_p, wp)
    zeta_y = _weighted_var(mu_p_on_q - mu_q_on_q, wq)

    # doubly centered kernels; squared HS norms are their weighted square sums
    cpp = kpp - mu_p_on_p[:, None] - mu_p_on_p[None, :] + m_pp
    cqq = kqq - mu_q_on_q[:, None] - mu_q_on_q[None, :] + m_qq
    cpq = kpq - mu_q_on_p[:, None] - mu_p_on_q[None, :] + m_pq
    hs_pp = max(float(wp @ (cpp**2) @ wp), 0.0)
    hs_qq = max(float(wq @ (cqq**2) @ wq), 0.0)
    hs_pq = max(float(wp @ (cpq**2) @ wq), 0.0)

    mu_cp_mu = _weighted_var(mu_p_on_p, wp)
    mu_cq_mu = _weighted_var(mu_q_on_q, wq)

    return PopulationFunctionals(
        mmd_sq=mmd_sq,
        zeta_x=zeta_x,
        zeta_y=zeta_y,
        hs_pp=hs_pp,
        hs_qq=hs_qq,
        hs_pq=hs_pq,
        mu_cp_mu=mu_cp_mu,
        mu_cq_mu=mu_cq_mu,
    )


def covariance_quadratic_form(dist: DiscreteDistribution, spec: KernelSpec, point) -> float:
    """<k(point, .), C k(point, .)> = Var_{X~dist}[k(point, X)]."""
    pt = np.atleast_1d(np.asarray(point, dtype=float)).reshape(1, -1)
    if pt.shape[1] != dist.dim:
        raise DistributionError(f"point has dimension {pt.shape[1]}, support has {dist.dim}")
    kvec = gram_matrix(spec, pt, dist.support)[0]
    return _weighted_var(kvec, dist.probs)


def classify_degeneracy(
    f: PopulationFunctionals, tol: float = DEFAULT_DEGENERACY_TOL
) -> Degeneracy:
    """Degeneracy regime of the estimator's sampling distribution.

    Infinitely degenerate when every covariance functional vanishes (both
    covariance operators are zero); first order when the first-order
    components zeta_x, zeta_y vanish but some covariance functional does
    not; non-degenerate otherwise.  The tolerance is absolute.
    """
    if tol < 0:
        raise ParameterError(f"tol must be nonnegative, got {tol}")
    operator_terms = (f.hs_pp, f.hs_qq, f.zeta_x, f.zeta_y, f.mu_cp_mu, f.mu_cq_mu)
    if all(t <= tol for t in operator_terms):
        return Degeneracy.INFINITELY_DEGENERATE
    if f.zeta_x <= tol and f.zeta_y <= tol:
        return Degeneracy.FIRST_ORDER
    return Degeneracy.NON_DEGENERATE


def _index_tuples(m: int, n: int) -> np.ndarray:
    """All m^n index tuples in mixed-radix (lexicographic) order, shape (m^n, n)."""
    grids = np.meshgrid(*([np.arange(m)] * n), indexing="ij")
    return np.stack(grids, axis=-1).reshape(-1, n)


def _self_pair_sums(kblock: np.ndarray, tuples: np.ndarray) -> np.ndarray:
    """sum_{i<j} k(s_{t_i}, s_{t_j}) for every index tuple (vectorized)."""
    n = tuples.shape[1]
    acc = np.zeros(tuples.shape[0])
    for i, j in combinations(range(n), 2):
        acc += kblock[tuples[:, i], tuples[:, j]]
    return acc


def brute_force_moments(
    p: DiscreteDistribution,
    q: DiscreteDistribution,
    spec: KernelSpec,
    nx: int,
    ny: int,
    kind: str = "unbiased",
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> Moments:
    """Exact mean and variance of an estimator by enumerating all sample tuples.

    Every assignment of support points to the nx + ny sample slots is visited
    with its product probability; the estimator value is recomputed for each.
    The variance uses a centered second pass accumulated with compensated
    summation, so results are exact up to floating-point rounding.
    """
    if kind not in ("unbiased", "ustat"):
        raise ParameterError(f"kind must be 'unbiased' or 'ustat', got {kind!r}")
    if nx < 2 or ny < 2:
        raise ParameterError(f"need nx, ny >= 2, got nx={nx}, ny={ny}")
    if kind == "ustat" and nx != ny:
        raise PairingError(f"paired U-statistic needs nx == ny, got {nx} and {ny}")
    if p.dim != q.dim:
        raise DistributionError(f"support dimensions differ: {p.dim} vs {q.dim}")
    total = p.size**nx * q.size**ny
    if total > cap:
        raise EnumerationTooLargeError(
            f"{p.size}^{nx} * {q.size}^{ny} = {total} tuples exceeds cap {cap}"
        )

    kpp = gram_matrix(spec, p.support)
    kqq = gram_matrix(spec, q.support)
    kpq = gram_matrix(spec, p.support, q.support)

    tx = _index_tuples(p.size, nx)
    ty = _index_tuples(q.size, ny)
    wx = np.prod(p.probs[tx], axis=1)
    wy = np.prod(q.probs[ty], axis=1)

    ax = _self_pair_sums(kpp, tx)  # sum_{i<j} Kxx per x-tuple
    ay = _self_pair_sums(kqq, ty)

    # cross sums decompose through per-support-row accumulations
    row_acc = np.zeros((tx.shape[0], q.size))
    for i in range(nx):
        row_acc += kpq[tx[:, i], :]
    counts_y = np.zeros((ty.shape[0], q.size))
    for j in range(ny):
        counts_y[np.arange(ty.shape[0]), ty[:, j]] += 1.0
    cross_all = row_acc @ counts_y.T  # sum_{i,j} k(x_i, y_j) per tuple pair

    if kind == "unbiased":
        values = (
            (2.0 / (nx * (nx - 1))) * ax[:, None]
            + (2.0 / (ny * (ny - 1))) * ay[None, :]
            - (2.0 / (nx * ny)) * cross_all
        )
    else:
        n = nx
        cross_diag = np.zeros((tx.shape[0], ty.shape[0]))
        for i in range(n):
            cross_diag += kpq[tx[:, i]][:, ty[:, i]]
        values = (2.0 * (ax[:, None] + ay[None, :] - (cross_all - cross_diag))) / (n * (n - 1))

    weights = np.multiply.outer(wx, wy).ravel()
    values = values.ravel()
    mean = math.fsum((weights * values).tolist())
    centered = values - mean
    variance = math.fsum((weights * centered * centered).tolist())
    return Moments(mean=mean, variance=max(variance, 0.0))
