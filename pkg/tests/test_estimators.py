import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mmdtest import (
    GramBlocks,
    InsufficientSamplesError,
    KernelSpec,
    PairingError,
    ParameterError,
    SampleSet,
    gap_bound,
    gram_blocks,
    mmd_unbiased,
    mmd_ustat,
)
from oracle_helpers import _estimator_value

GAUSS = KernelSpec("gaussian", {"lengthscale": 1.0})


def _blocks(kxx, kyy, kxy):
    return GramBlocks(
        kxx=np.asarray(kxx, dtype=float),
        kyy=np.asarray(kyy, dtype=float),
        kxy=np.asarray(kxy, dtype=float),
    )


def test_unbiased_hand_value():
    b = _blocks([[0.0, 2.0], [2.0, 0.0]], [[0.0, 4.0], [4.0, 0.0]], [[0.5, 0.5], [0.5, 0.5]])
    est = mmd_unbiased(b)
    assert est.value == pytest.approx(5.0, abs=1e-15)
    assert est.kind == "unbiased"
    assert (est.nx, est.ny) == (2, 2)


def test_ustat_hand_value():
    s = SampleSet(np.array([0.0, 1.0]), np.array([2.0, 3.0]))
    est = mmd_ustat(gram_blocks(GAUSS, s))
    assert est.value == pytest.approx(math.exp(-0.5) - math.exp(-4.5), rel=1e-14)
    assert est.kind == "ustat"


def test_ustat_diagonal_identity():
    # the two estimators differ only in the cross-block diagonal:
    # ustat - unbiased = (2 / (n(n-1))) (tr kxy - sum(kxy)/n)
    rng = np.random.default_rng(7)
    for n in (2, 5, 9):
        s = SampleSet(rng.normal(size=(n, 2)), rng.normal(size=(n, 2)))
        b = gram_blocks(GAUSS, s)
        gap = mmd_ustat(b).value - mmd_unbiased(b).value
        expected = (
            2.0
            / (n * (n - 1))
            * (float(np.trace(b.kxy)) - float(np.sum(b.kxy)) / n)
        )
        assert gap == pytest.approx(expected, abs=1e-14)


def test_ustat_depends_on_pairing_order():
    s = SampleSet(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    aligned = mmd_ustat(gram_blocks(GAUSS, s))
    flipped = mmd_ustat(gram_blocks(GAUSS, SampleSet(s.x, s.y[::-1])))
    assert aligned.value != flipped.value
    # the unbiased estimator ignores row order entirely
    u1 = mmd_unbiased(gram_blocks(GAUSS, s))
    u2 = mmd_unbiased(gram_blocks(GAUSS, SampleSet(s.x, s.y[::-1])))
    assert u1.value == u2.value


def test_unbiased_exact_exchange_symmetry():
    rng = np.random.default_rng(3)
    s = SampleSet(rng.normal(size=(6, 3)), rng.normal(size=(4, 3)))
    forward = mmd_unbiased(gram_blocks(GAUSS, s)).value
    backward = mmd_unbiased(gram_blocks(GAUSS, s.swapped())).value
    assert forward == backward


finite = st.floats(-10.0, 10.0, allow_nan=False, allow_subnormal=False)


@given(
    st.integers(2, 6),
    st.integers(2, 6),
    st.integers(0, 2**31 - 1),
)
@settings(max_examples=30, deadline=None)
def test_unbiased_matches_direct_sum(nx, ny, seed):
    rng = np.random.default_rng(seed)
    s = SampleSet(rng.normal(size=(nx, 2)), rng.normal(size=(ny, 2)))
    b = gram_blocks(GAUSS, s)
    direct = _estimator_value(b.kxx, b.kyy, b.kxy, "unbiased")
    assert mmd_unbiased(b).value == pytest.approx(direct, abs=1e-13)


@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_ustat_matches_direct_sum(n, seed):
    rng = np.random.default_rng(seed)
    s = SampleSet(rng.normal(size=(n, 2)), rng.normal(size=(n, 2)))
    b = gram_blocks(GAUSS, s)
    direct = _estimator_value(b.kxx, b.kyy, b.kxy, "ustat")
    assert mmd_ustat(b).value == pytest.approx(direct, abs=1e-13)


def test_identical_pairs_give_zero_ustat():
    # with y_i = x_i the off-diagonal cross sum equals the within sums,
    # so the paired statistic cancels exactly
    x = np.arange(5.0)
    b = gram_blocks(GAUSS, SampleSet(x, x.copy()))
    assert mmd_ustat(b).value == 0.0


def test_estimator_value_to_dict():
    v = mmd_unbiased(gram_blocks(GAUSS, SampleSet(np.arange(3.0), np.arange(3.0))))
    d = v.to_dict()
    assert d == {"value": v.value, "kind": "unbiased", "nx": 3, "ny": 3}


def test_insufficient_samples():
    b = gram_blocks(GAUSS, SampleSet(np.arange(1.0, 2.0), np.arange(3.0)))
    with pytest.raises(InsufficientSamplesError):
        mmd_unbiased(b)
    with pytest.raises(PairingError):
        mmd_ustat(gram_blocks(GAUSS, SampleSet(np.arange(3.0), np.arange(4.0))))


def test_gap_bound_value_and_monotonicity():
    assert gap_bound(1.0, 100, 2.0 / math.e) == pytest.approx(0.008, rel=1e-12)
    assert gap_bound(1.0, 400, 0.05) < gap_bound(1.0, 100, 0.05)
    assert gap_bound(1.0, 100, 0.01) > gap_bound(1.0, 100, 0.10)
    assert gap_bound(3.0, 100, 0.05) == pytest.approx(3 * gap_bound(1.0, 100, 0.05), rel=1e-12)


def test_gap_bound_validation():
    with pytest.raises(ParameterError):
        gap_bound(-1.0, 100, 0.05)
    with pytest.raises(InsufficientSamplesError):
        gap_bound(1.0, 1, 0.05)
    for delta in (0.0, 1.0, -0.5, 2.0):
        with pytest.raises(ParameterError):
            gap_bound(1.0, 100, delta)
