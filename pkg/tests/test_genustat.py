import itertools
import math

import numpy as np
import pytest

from mmdtest import (
    DiscreteDistribution,
    EnumerationTooLargeError,
    GenUSpec,
    IncompleteTableError,
    InsufficientSamplesError,
    KernelSpec,
    ParameterError,
    SampleSet,
    ZetaTable,
    check_block_symmetry,
    classify_degeneracy,
    degeneracy_order,
    gen_u_evaluate,
    gram_blocks,
    mmd_gen_u_spec,
    mmd_unbiased,
    mmd_unbiased_variance,
    mmd_zeta_table,
    population_functionals,
    sen_variance,
    ustat_variance,
)
from oracle_helpers import enumerate_zetas, naive_moments

GAUSS = KernelSpec("gaussian", {"lengthscale": 1.0})
TRIANGLE = KernelSpec("triangle")

P_SKEW = DiscreteDistribution([0.0, 1.0, 2.0], [0.6, 0.3, 0.1])
Q_SKEW = DiscreteDistribution([0.0, 1.0, 2.0], [0.1, 0.3, 0.6])
Q_WIDE = DiscreteDistribution([0.0, 2.0], [0.4, 0.6])
P_SEP = DiscreteDistribution.uniform([1.0, 2.0])
Q_SEP = DiscreteDistribution.uniform([3.0, 4.0])

SQ_DIFF = GenUSpec(num_groups=1, block_sizes=(2,), h=lambda b: (b[0] - b[1]) ** 2)


def test_genuspec_validation():
    with pytest.raises(ParameterError):
        GenUSpec(num_groups=0, block_sizes=(), h=lambda: 0.0)
    with pytest.raises(ParameterError):
        GenUSpec(num_groups=2, block_sizes=(2,), h=lambda a, b: 0.0)
    with pytest.raises(ParameterError):
        GenUSpec(num_groups=1, block_sizes=(0,), h=lambda b: 0.0)


def test_gen_u_constant_kernel_on_constant_data():
    spec = GenUSpec(num_groups=1, block_sizes=(2,), h=lambda b: b[0] * b[1] - 1.0)
    assert gen_u_evaluate(spec, [np.ones(3)]) == 0.0


def test_gen_u_squared_difference_hand_value():
    assert gen_u_evaluate(SQ_DIFF, [np.array([0.0, 1.0, 2.0])]) == pytest.approx(2.0, abs=1e-15)
    # equals twice the unbiased sample variance on any input
    x = np.array([0.3, -1.1, 2.4, 0.9, 5.0])
    got = gen_u_evaluate(SQ_DIFF, [x])
    assert got == pytest.approx(2.0 * np.var(x, ddof=1), rel=1e-13)


@pytest.mark.parametrize("nx,ny", [(3, 3), (4, 3)])
def test_gen_u_mmd_matches_fast_estimator(nx, ny):
    rng = np.random.default_rng(13)
    s = SampleSet(rng.normal(size=(nx, 2)), rng.normal(size=(ny, 2)))
    slow = gen_u_evaluate(mmd_gen_u_spec(GAUSS), [s.x, s.y])
    fast = mmd_unbiased(gram_blocks(GAUSS, s)).value
    assert slow == pytest.approx(fast, abs=1e-12)


def test_gen_u_errors():
    with pytest.raises(InsufficientSamplesError):
        gen_u_evaluate(SQ_DIFF, [np.array([1.0])])
    with pytest.raises(ParameterError):
        gen_u_evaluate(SQ_DIFF, [np.ones(3), np.ones(3)])
    with pytest.raises(EnumerationTooLargeError):
        gen_u_evaluate(SQ_DIFF, [np.zeros(100)], cap=10)


def test_block_symmetry_check():
    rng = np.random.default_rng(0)
    groups = [rng.normal(size=(6, 1)), rng.normal(size=(5, 1))]
    assert check_block_symmetry(mmd_gen_u_spec(GAUSS), groups)
    ordered = GenUSpec(num_groups=1, block_sizes=(2,), h=lambda b: b[0] - b[1])
    assert not check_block_symmetry(ordered, [rng.normal(size=6)])


class TestZetaTable:
    def test_zero_index_forced(self):
        t = ZetaTable(block_sizes=(2,), values={(1,): 0.5, (2,): 1.0})
        assert t[(0,)] == 0.0
        assert t[(1,)] == 0.5

    def test_tiny_negative_clamped(self):
        t = ZetaTable(block_sizes=(2,), values={(1,): -1e-13, (2,): 1.0})
        assert t[(1,)] == 0.0

    def test_all_indices(self):
        t = ZetaTable(block_sizes=(2, 1), values={})
        assert set(t.all_indices()) == {
            (0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1),
        }

    def test_validation(self):
        with pytest.raises(ParameterError):
            ZetaTable(block_sizes=(2,), values={(3,): 0.1})
        with pytest.raises(ParameterError):
            ZetaTable(block_sizes=(2,), values={(1,): -0.5})
        with pytest.raises(ParameterError):
            ZetaTable(block_sizes=(2,), values={(0,): 0.7})

    def test_missing_entry(self):
        t = ZetaTable(block_sizes=(2,), values={(1,): 0.5})
        with pytest.raises(IncompleteTableError):
            t[(2,)]


def _one_group_zetas(dist: DiscreteDistribution):
    # h(a, b) = (a - b)^2 on a scalar discrete distribution
    pts = dist.support.ravel()
    w = dist.probs
    cond = np.array([float(np.sum(w * (a - pts) ** 2)) for a in pts])
    mean = float(np.sum(w * cond))
    zeta1 = float(np.sum(w * (cond - mean) ** 2))
    pair_w = np.multiply.outer(w, w).ravel()
    pair_v = np.subtract.outer(pts, pts).ravel() ** 2
    pair_mean = float(np.sum(pair_w * pair_v))
    zeta2 = float(np.sum(pair_w * (pair_v - pair_mean) ** 2))
    return zeta1, zeta2


def _one_group_u_variance(dist: DiscreteDistribution, n: int):
    # direct route: the U-statistic value on every sample tuple
    pts = dist.support.ravel()
    vals, wts = [], []
    for t in itertools.product(range(dist.size), repeat=n):
        sample = pts[list(t)]
        vals.append(gen_u_evaluate(SQ_DIFF, [sample]))
        wts.append(math.prod(dist.probs[i] for i in t))
    vals, wts = np.asarray(vals), np.asarray(wts)
    mean = float(np.sum(wts * vals))
    return mean, float(np.sum(wts * (vals - mean) ** 2))


class TestSenVariance:
    def test_one_group_against_enumeration(self):
        dist = DiscreteDistribution([0.0, 1.0, 3.0], [0.5, 0.3, 0.2])
        z1, z2 = _one_group_zetas(dist)
        table = ZetaTable(block_sizes=(2,), values={(1,): z1, (2,): z2})
        for n in (2, 3, 4):
            mean, var = _one_group_u_variance(dist, n)
            assert sen_variance(table, (n,)) == pytest.approx(var, rel=1e-10)
            # the same weights are what the order-2 closed form encodes
            assert sen_variance(table, (n,)) == pytest.approx(
                ustat_variance(z1, z2, n), rel=1e-12
            )
            # mean preservation: the weighted average of U equals E[h]
            assert mean == pytest.approx(pair_expectation(dist), abs=1e-12)

    @pytest.mark.parametrize("pair", [(P_SKEW, Q_SKEW), (P_SKEW, Q_WIDE)])
    @pytest.mark.parametrize("nx,ny", [(2, 2), (3, 2), (4, 3)])
    def test_mmd_table_against_enumeration(self, pair, nx, ny):
        p, q = pair
        table = ZetaTable(block_sizes=(2, 2), values=enumerate_zetas(p, q, GAUSS))
        _, var = naive_moments(p, q, GAUSS, nx, ny, kind="unbiased")
        assert sen_variance(table, (nx, ny)) == pytest.approx(var, rel=1e-10)

    def test_all_zero_table(self):
        zero = ZetaTable(
            (2, 2), {(a, b): 0.0 for a in range(3) for b in range(3)}
        )
        assert sen_variance(zero, (5, 7)) == 0.0

    def test_minimal_sizes_select_top_entry(self):
        # at n_j == m_j every other hypergeometric weight vanishes, so a
        # partial table suffices and the variance is Var(h) itself
        assert sen_variance(ZetaTable((2, 2), {(2, 2): 0.7}), (2, 2)) == 0.7

    def test_errors(self):
        table = ZetaTable(block_sizes=(2, 2), values={(2, 2): 0.7})
        with pytest.raises(IncompleteTableError):
            sen_variance(table, (5, 5))
        with pytest.raises(ParameterError):
            sen_variance(table, (5,))
        with pytest.raises(InsufficientSamplesError):
            sen_variance(table, (1, 5))


def pair_expectation(dist: DiscreteDistribution) -> float:
    pts = dist.support.ravel()
    w = dist.probs
    return float(np.sum(np.multiply.outer(w, w) * np.subtract.outer(pts, pts) ** 2))


class TestMmdZetaTable:
    @pytest.mark.parametrize(
        "p,q,spec",
        [
            (P_SKEW, Q_SKEW, GAUSS),
            (P_SKEW, Q_WIDE, GAUSS),
            (P_SEP, Q_SEP, TRIANGLE),
            (P_SKEW, Q_WIDE, TRIANGLE),
        ],
        ids=["skew-gauss", "asym-gauss", "separated-triangle", "asym-triangle"],
    )
    def test_matches_conditional_enumeration(self, p, q, spec):
        table = mmd_zeta_table(population_functionals(p, q, spec))
        enum = enumerate_zetas(p, q, spec)
        for key, want in enum.items():
            assert table[key] == pytest.approx(want, abs=1e-12), key

    def test_point_mass_all_zero(self):
        p = DiscreteDistribution([0.3], [1.0])
        table = mmd_zeta_table(population_functionals(p, p, GAUSS))
        assert all(table[d] == 0.0 for d in table.all_indices())

    def test_top_entry_identity(self):
        f = population_functionals(P_SKEW, Q_WIDE, GAUSS)
        table = mmd_zeta_table(f)
        want = f.hs_pp + f.hs_qq + f.hs_pq + 2.0 * (f.zeta_x + f.zeta_y)
        assert table[(2, 2)] == pytest.approx(want, rel=1e-15)

    def test_sen_equals_closed_form(self):
        f = population_functionals(P_SKEW, Q_WIDE, GAUSS)
        table = mmd_zeta_table(f)
        for nx, ny in ((2, 2), (5, 3), (9, 14)):
            closed = mmd_unbiased_variance(f, nx, ny).total
            assert sen_variance(table, (nx, ny)) == pytest.approx(closed, rel=1e-10)


class TestDegeneracyOrder:
    def test_non_degenerate_is_zero(self):
        table = mmd_zeta_table(population_functionals(P_SKEW, Q_SKEW, GAUSS))
        assert degeneracy_order(table) == 0

    def test_equal_distributions_first_order(self):
        table = mmd_zeta_table(population_functionals(P_SKEW, P_SKEW, GAUSS))
        assert degeneracy_order(table) == 1

    def test_separated_fixture_first_order(self):
        f = population_functionals(P_SEP, Q_SEP, TRIANGLE)
        table = mmd_zeta_table(f)
        assert degeneracy_order(table) == 1
        # consistent with the functional-level classification
        assert classify_degeneracy(f).value == "first_order"

    def test_all_zero_table_infinite(self):
        zero = ZetaTable((2, 2), {(a, b): 0.0 for a in range(3) for b in range(3)})
        assert degeneracy_order(zero) == math.inf

    def test_incomplete_table_rejected(self):
        with pytest.raises(IncompleteTableError):
            degeneracy_order(ZetaTable((2, 2), {(1, 1): 0.3}))

    def test_tol_validation(self):
        table = mmd_zeta_table(population_functionals(P_SKEW, Q_SKEW, GAUSS))
        with pytest.raises(ParameterError):
            degeneracy_order(table, tol=-1.0)


def test_degenerate_rate_scaling():
    # first-order degenerate with orthogonal covariance operators and equal
    # group sizes: the variance is a pure 1/(n(n-1)) law, so n(n-1) Var is
    # exactly constant while n^2 Var only approaches the same constant
    table = mmd_zeta_table(population_functionals(P_SEP, Q_SEP, TRIANGLE))
    exact = [n * (n - 1) * sen_variance(table, (n, n)) for n in (4, 8, 16)]
    for v in exact:
        assert v == pytest.approx(exact[0], rel=1e-12)
    drift = [abs(n * n * sen_variance(table, (n, n)) - exact[0]) for n in (4, 8, 16)]
    assert drift[0] > drift[1] > drift[2]
    assert drift[2] < 0.07 * exact[0]
    # same convergence at min-proportional unequal sizes (ny = 2 nx), where
    # the n^2-scaled limit is 2 hs_pp + hs_qq / 2
    limit = 2 * 0.25 + 0.25 / 2
    seq = [n * n * sen_variance(table, (n, 2 * n)) for n in (4, 8, 16)]
    assert abs(seq[2] - limit) < abs(seq[1] - limit) < abs(seq[0] - limit)
