"""Kernel families and Gram matrix construction.

Supported families:

* ``gaussian``: k(x, y) = exp(-||x - y||^2 / (2 l^2)), lengthscale l > 0,
* ``linear``:   k(x, y) = <x, y>,
* ``triangle``: k(x, y) = max(1 - ||x - y||, 0).

Gaussian and triangle kernels are bounded with sup k = 1 and k(x, x) = 1;
the linear kernel is unbounded.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .errors import ParameterError, ShapeError
from .samples import SampleSet

FAMILIES = ("gaussian", "linear", "triangle")

__all__ = [
    "FAMILIES",
    "KernelSpec",
    "GramBlocks",
    "eval_kernel",
    "gram_matrix",
    "gram_blocks",
]


@dataclass(frozen=True)
class KernelSpec:
    """A fully parameterized member of one of the supported families."""

    family: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown kernel family {self.family!r}")
        params = {str(k): float(v) for k, v in dict(self.params).items()}
        object.__setattr__(self, "params", params)
        if self.family == "gaussian":
            if set(params) != {"lengthscale"}:
                raise ParameterError(
                    "gaussian kernel takes exactly one parameter 'lengthscale', "
                    f"got {sorted(params) or 'none'}"
                )
            ell = params["lengthscale"]
            if not (math.isfinite(ell) and ell > 0):
                raise ParameterError(f"lengthscale must be positive and finite, got {ell}")
        elif params:
            raise ParameterError(
                f"{self.family} kernel takes no parameters, got {sorted(params)}"
            )

    @property
    def lengthscale(self) -> float:
        if self.family != "gaussian":
            raise ParameterError(f"{self.family} kernel has no lengthscale")
        return self.params["lengthscale"]

    def sup_value(self) -> float:
        """sup_x k(x, x); infinite for the linear kernel."""
        return 1.0 if self.family in ("gaussian", "triangle") else math.inf

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, payload: Mapping) -> "KernelSpec":
        try:
            family = payload["family"]
        except (KeyError, TypeError):
            raise ParameterError("kernel payload must contain a 'family' entry") from None
        return cls(family, payload.get("params", {}))

    @classmethod
    def from_json(cls, text: str) -> "KernelSpec":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"invalid kernel JSON: {exc}") from None
        return cls.from_dict(payload)


@dataclass(frozen=True)
class GramBlocks:
    """The three kernel blocks of a two-sample problem.

    kxx and kyy are exactly symmetric; all arrays are frozen after
    construction and safe to share.
    """

    kxx: np.ndarray
    kyy: np.ndarray
    kxy: np.ndarray

    def __post_init__(self):
        for name in ("kxx", "kyy", "kxy"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
        if self.kxx.ndim != 2 or self.kxx.shape[0] != self.kxx.shape[1]:
            raise ShapeError(f"kxx must be square, got {self.kxx.shape}")
        if self.kyy.ndim != 2 or self.kyy.shape[0] != self.kyy.shape[1]:
            raise ShapeError(f"kyy must be square, got {self.kyy.shape}")
        if self.kxy.shape != (self.kxx.shape[0], self.kyy.shape[0]):
            raise ShapeError(
                f"kxy must have shape {(self.kxx.shape[0], self.kyy.shape[0])}, got {self.kxy.shape}"
            )
        for name in ("kxx", "kyy", "kxy"):
            arr = getattr(self, name)
            if arr.flags.writeable:
                arr = arr.copy()
                arr.flags.writeable = False
                object.__setattr__(self, name, arr)

    @property
    def nx(self) -> int:
        return self.kxx.shape[0]

    @property
    def ny(self) -> int:
        return self.kyy.shape[0]

    def pooled(self) -> np.ndarray:
        """Assemble the full (nx+ny) x (nx+ny) Gram matrix."""
        top = np.hstack([self.kxx, self.kxy])
        bottom = np.hstack([self.kxy.T, self.kyy])
        return np.vstack([top, bottom])


def _sq_dists(a: np.ndarray, b: np.ndarray, self_block: bool) -> np.ndarray:
    a2 = np.sum(a * a, axis=1)
    b2 = a2 if self_block else np.sum(b * b, axis=1)
    d2 = a2[:, None] + b2[None, :] - 2.0 * (a @ b.T)
    np.maximum(d2, 0.0, out=d2)
    if self_block:
        np.fill_diagonal(d2, 0.0)
    return d2


def _apply_kernel(spec: KernelSpec, a: np.ndarray, b: np.ndarray, self_block: bool) -> np.ndarray:
    if spec.family == "linear":
        k = a @ b.T
    else:
        d2 = _sq_dists(a, b, self_block)
        if spec.family == "gaussian":
            ell = spec.params["lengthscale"]
            k = np.exp(d2 / (-2.0 * ell * ell))
        else:
            k = np.maximum(1.0 - np.sqrt(d2), 0.0)
    if self_block:
        # mirror the upper triangle so the block is exactly symmetric
        upper = np.triu(k)
        k = upper + np.triu(k, 1).T
    return k


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Evaluate k(x, y) for a single pair of points."""
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    yv = np.atleast_1d(np.asarray(y, dtype=float))
    if xv.ndim != 1 or yv.ndim != 1 or xv.shape != yv.shape:
        raise ShapeError(f"points must be vectors of equal length, got {xv.shape} and {yv.shape}")
    if spec.family == "linear":
        return float(xv @ yv)
    diff = xv - yv
    d2 = float(diff @ diff)
    if spec.family == "gaussian":
        ell = spec.params["lengthscale"]
        return float(math.exp(-d2 / (2.0 * ell * ell)))
    return float(max(1.0 - math.sqrt(d2), 0.0))


def gram_matrix(spec: KernelSpec, a, b: Optional[np.ndarray] = None) -> np.ndarray:
    """Gram matrix between row sets a and b (b=None means a vs itself, exactly symmetric)."""
    am = np.asarray(a, dtype=float)
    if am.ndim == 1:
        am = am.reshape(-1, 1)
    if am.ndim != 2 or am.shape[0] < 1:
        raise ShapeError(f"expected a non-empty 2-D array, got shape {np.shape(a)}")
    if b is None:
        return _apply_kernel(spec, am, am, self_block=True)
    bm = np.asarray(b, dtype=float)
    if bm.ndim == 1:
        bm = bm.reshape(-1, 1)
    if bm.ndim != 2 or bm.shape[0] < 1:
        raise ShapeError(f"expected a non-empty 2-D array, got shape {np.shape(b)}")
    if am.shape[1] != bm.shape[1]:
        raise ShapeError(f"feature dimensions differ: {am.shape[1]} vs {bm.shape[1]}")
    return _apply_kernel(spec, am, bm, self_block=False)


def gram_blocks(spec: KernelSpec, samples: SampleSet) -> GramBlocks:
    """All three kernel blocks for a two-sample problem."""
    return GramBlocks(
        kxx=gram_matrix(spec, samples.x),
        kyy=gram_matrix(spec, samples.y),
        kxy=gram_matrix(spec, samples.x, samples.y),
    )
