import json
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import norm

from tritest import (
    ConditionalKernel,
    ContingencyTable,
    Decision,
    Outcome,
    ValidationError,
    binom_pvalue_lower,
    binom_pvalue_upper,
    iv_bootstrap_test,
    iv_lhs,
    manski_bounds,
    naive_manski_ternary,
    positivity_check,
    wilson_interval,
)


def exact_upper_tail(k, n, p0):
    """Big-rational oracle for P(Bin(n, p0) >= k), at p0's exact float value."""
    p = Fraction(p0)
    q = 1 - p
    return sum(
        math.comb(n, j) * p**j * q ** (n - j) for j in range(k, n + 1)
    )


def exact_upper_tails(n, p0):
    """All upper tails for one (n, p0), via an incremental pmf and suffix sums.

    Works in integers over the common denominator den**n, where p0 = num/den
    exactly (den a power of two), so no gcd normalization ever runs.
    """
    num, den = p0.as_integer_ratio()
    comp = den - num
    pmf = [comp**n]
    for j in range(n):
        pmf.append(pmf[-1] * (n - j) * num // ((j + 1) * comp))
    tails = [0] * (n + 2)
    for j in range(n, -1, -1):
        tails[j] = tails[j + 1] + pmf[j]
    return tails[: n + 1], den**n


def iv_lhs_loops(values):
    """Brute-force triple-loop reference for the inequality statistic."""
    n_z, n_x, n_y = values.shape
    best = None
    for x in range(n_x):
        total = 0.0
        for y in range(n_y):
            m = values[0, x, y]
            for z in range(1, n_z):
                if values[z, x, y] > m:
                    m = values[z, x, y]
            total += m
        if best is None or total > best:
            best = total
    return best


def random_kernel(rng, n_x, n_y, n_z=2):
    raw = rng.random((n_z, n_x, n_y))
    raw /= raw.sum(axis=(1, 2), keepdims=True)
    return ConditionalKernel(raw)


class TestContingencyTable:
    def test_basic_accessors(self):
        t = ContingencyTable(np.array([[[1, 2], [3, 4]], [[5, 6], [7, 8]]]))
        assert t.has_instrument
        assert (t.z_card, t.x_card, t.y_card) == (2, 2, 2)
        assert t.n == 36
        assert t.z_totals().tolist() == [10, 26]

    def test_no_instrument_table(self):
        t = ContingencyTable(np.array([[1, 2], [3, 4]]))
        assert not t.has_instrument
        assert t.n == 10
        with pytest.raises(ValidationError):
            t.z_totals()

    def test_validation(self):
        with pytest.raises(ValidationError):
            ContingencyTable(np.array([1, 2, 3]))
        with pytest.raises(ValidationError):
            ContingencyTable(np.array([[-1, 2], [3, 4]]))
        with pytest.raises(ValidationError):
            ContingencyTable(np.array([[1.5, 2.0], [3.0, 4.0]]))

    def test_integer_valued_floats_accepted(self):
        t = ContingencyTable(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert t.counts.dtype == np.int64

    def test_counts_are_read_only(self):
        t = ContingencyTable(np.array([[1, 2], [3, 4]]))
        with pytest.raises(ValueError):
            t.counts[0, 0] = 9

    def test_json_round_trip(self):
        for counts in (np.arange(4).reshape(2, 2), np.arange(24).reshape(2, 6, 2)):
            t = ContingencyTable(counts)
            doc = t.to_json_dict()
            assert ContingencyTable.from_json_dict(json.loads(json.dumps(doc))) == t

    def test_json_layout_is_z_major_row_major(self):
        t = ContingencyTable(np.arange(8).reshape(2, 2, 2))
        doc = t.to_json_dict()
        assert doc["card"] == {"z": 2, "x": 2, "y": 2}
        assert doc["counts"] == [0, 1, 2, 3, 4, 5, 6, 7]

    def test_from_json_dict_errors(self):
        with pytest.raises(ValidationError):
            ContingencyTable.from_json_dict({"card": {"x": 2, "y": 2}, "counts": [1, 2, 3]})
        with pytest.raises(ValidationError):
            ContingencyTable.from_json_dict({"counts": [1, 2, 3, 4]})

    def test_equality_ignores_labels(self):
        a = ContingencyTable(np.array([[1, 2], [3, 4]]), labels=(("a", "b"), ("c", "d")))
        b = ContingencyTable(np.array([[1, 2], [3, 4]]))
        assert a == b
        assert a != ContingencyTable(np.array([[1, 2], [3, 5]]))


class TestConditionalKernel:
    def test_from_table(self):
        t = ContingencyTable(np.array([[[1, 1], [2, 0]], [[0, 5], [5, 0]]]))
        k = ConditionalKernel.from_table(t)
        assert k.values[0].tolist() == [[0.25, 0.25], [0.5, 0.0]]
        assert k.values[1].tolist() == [[0.0, 0.5], [0.5, 0.0]]

    def test_from_table_empty_slice(self):
        t = ContingencyTable(np.array([[[1, 1], [2, 0]], [[0, 0], [0, 0]]]))
        with pytest.raises(ValidationError):
            ConditionalKernel.from_table(t)

    def test_slice_sums_validated(self):
        bad = np.full((2, 2, 2), 0.3)
        with pytest.raises(ValidationError):
            ConditionalKernel(bad)


class TestBinomialTails:
    def test_single_point_upper_tail(self):
        assert binom_pvalue_upper(10, 10, 0.5) == pytest.approx(2.0**-10, rel=1e-12)

    def test_full_tail_is_one(self):
        assert binom_pvalue_upper(0, 17, 0.3) == 1.0
        assert binom_pvalue_lower(17, 17, 0.3) == 1.0

    def test_small_exact_values(self):
        assert binom_pvalue_upper(4, 5, 0.5) == pytest.approx(6 / 32, abs=1e-15)
        assert binom_pvalue_lower(1, 5, 0.5) == pytest.approx(6 / 32, abs=1e-15)
        assert binom_pvalue_lower(0, 10, 0.5) == pytest.approx(2.0**-10, rel=1e-12)

    def test_degenerate_null_proportions(self):
        assert binom_pvalue_upper(3, 10, 0.0) == 0.0
        assert binom_pvalue_upper(3, 10, 1.0) == 1.0
        assert binom_pvalue_lower(3, 10, 0.0) == 1.0
        assert binom_pvalue_lower(3, 10, 1.0) == 0.0

    def test_domain_errors(self):
        with pytest.raises(ValidationError):
            binom_pvalue_upper(11, 10, 0.5)
        with pytest.raises(ValidationError):
            binom_pvalue_upper(-1, 10, 0.5)
        with pytest.raises(ValidationError):
            binom_pvalue_upper(1, 0, 0.5)
        with pytest.raises(ValidationError):
            binom_pvalue_lower(1, 10, 1.5)

    @pytest.mark.parametrize("n", [1, 7, 23, 64])
    @pytest.mark.parametrize("p0", [0.1, 1 / 3, 0.5, 0.9])
    def test_matches_big_rational_oracle(self, n, p0):
        for k in range(n + 1):
            exact = float(exact_upper_tail(k, n, p0))
            assert binom_pvalue_upper(k, n, p0) == pytest.approx(exact, abs=1e-12)
            exact_low = 1.0 - float(exact_upper_tail(k + 1, n, p0)) if k < n else 1.0
            assert binom_pvalue_lower(k, n, p0) == pytest.approx(exact_low, abs=1e-12)

    def test_large_n_spot_checks(self):
        tails, scale = exact_upper_tails(1000, 0.3)
        for k in (0, 1, 250, 500, 999, 1000):
            assert binom_pvalue_upper(k, 1000, 0.3) == pytest.approx(
                float(Fraction(tails[k], scale)), abs=1e-12
            )

    def test_tails_complementary_exactly(self):
        for n in (1, 7, 50, 200):
            for p0 in (0.1, 0.3, 0.5, 0.7, 0.9):
                for k in range(1, n + 1):
                    assert binom_pvalue_upper(k, n, p0) + binom_pvalue_lower(k - 1, n, p0) == 1.0

    def test_upper_tail_monotone_in_k(self):
        values = [binom_pvalue_upper(k, 40, 0.37) for k in range(41)]
        assert all(a >= b for a, b in zip(values, values[1:]))


class TestPositivityCheck:
    def test_both_slices_present_rejects(self):
        t = ContingencyTable(np.array([[[3, 0], [0, 0]], [[0, 0], [0, 2]]]))
        v = positivity_check(t)
        assert v.decision is Decision.REJECT
        assert v.p_value == 0.0 and v.level == 0.0

    def test_empty_slice_accepts(self):
        t = ContingencyTable(np.array([[[3, 1], [2, 0]], [[0, 0], [0, 0]]]))
        v = positivity_check(t)
        assert v.decision is Decision.ACCEPT
        assert v.p_value == 1.0

    def test_single_observation_accepts(self):
        t = ContingencyTable(np.array([[[1, 0], [0, 0]], [[0, 0], [0, 0]]]))
        assert positivity_check(t).decision is Decision.ACCEPT

    def test_errors(self):
        with pytest.raises(ValidationError):
            positivity_check(ContingencyTable(np.array([[1, 2], [3, 4]])))
        with pytest.raises(ValidationError):
            positivity_check(ContingencyTable(np.zeros((2, 2, 2), dtype=int)))


class TestIvLhs:
    def test_uniform_kernel(self):
        k = ConditionalKernel(np.full((2, 3, 2), 1 / 6))
        assert iv_lhs(k) == pytest.approx(1 / 3, abs=1e-15)

    def test_two_point_violation(self):
        values = np.zeros((2, 2, 2))
        values[0, 0, 0] = 1.0
        values[1, 0, 1] = 1.0
        assert iv_lhs(ConditionalKernel(values)) == 2.0

    def test_z_independent_kernel_never_violates(self, rng):
        for _ in range(50):
            joint = rng.random((3, 4))
            joint /= joint.sum()
            k = ConditionalKernel(np.stack([joint, joint]))
            assert iv_lhs(k) == joint.sum(axis=1).max()
            assert iv_lhs(k) <= 1.0

    def test_matches_triple_loop_exactly(self, rng):
        for _ in range(200):
            n_x = int(rng.integers(1, 6))
            n_y = int(rng.integers(1, 6))
            k = random_kernel(rng, n_x, n_y)
            assert iv_lhs(k) == iv_lhs_loops(k.values)

    def test_bounded_by_y_cardinality(self, rng):
        for _ in range(50):
            k = random_kernel(rng, int(rng.integers(1, 6)), int(rng.integers(1, 6)))
            assert iv_lhs(k) <= k.values.shape[2]


def sample_table_from_kernel(rng, kernel, per_slice):
    counts = np.stack(
        [
            rng.multinomial(per_slice, kernel.values[z].ravel()).reshape(
                kernel.values.shape[1:]
            )
            for z in range(kernel.values.shape[0])
        ]
    )
    return ContingencyTable(counts)


class TestIvBootstrap:
    def test_boundary_statistic_gives_p_one(self):
        counts = np.zeros((2, 2, 2), dtype=int)
        counts[0, 0, 0] = 5
        counts[1, 0, 0] = 7
        v = iv_bootstrap_test(ContingencyTable(counts), B=200, alpha=0.05, seed=1)
        assert v.p_value == 1.0
        assert v.decision is Decision.ACCEPT

    def test_uniform_kernel_sample_gives_p_one(self):
        rng = np.random.default_rng(5)
        kernel = ConditionalKernel(np.full((2, 2, 2), 0.25))
        table = sample_table_from_kernel(rng, kernel, 1000)
        v = iv_bootstrap_test(table, B=200, alpha=0.05, seed=99)
        assert v.p_value == 1.0

    def test_point_mass_violation_is_deterministic(self):
        counts = np.zeros((2, 2, 2), dtype=int)
        counts[0, 0, 0] = 1000
        counts[1, 0, 1] = 1000
        v = iv_bootstrap_test(ContingencyTable(counts), B=2000, alpha=0.05, seed=3)
        assert v.p_value == 1 / 2001
        assert v.decision is Decision.REJECT

    def test_noisy_violation_rejects(self):
        values = np.array(
            [[[0.65, 0.05], [0.10, 0.20]], [[0.05, 0.65], [0.20, 0.10]]]
        )
        kernel = ConditionalKernel(values)
        assert iv_lhs(kernel) == pytest.approx(1.3)
        table = sample_table_from_kernel(np.random.default_rng(42), kernel, 1000)
        v = iv_bootstrap_test(table, B=500, alpha=0.05, seed=7)
        assert v.p_value < 0.01
        assert v.decision is Decision.REJECT

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(11)
        table = sample_table_from_kernel(rng, random_kernel(rng, 3, 3), 400)
        a = iv_bootstrap_test(table, B=300, alpha=0.05, seed=123)
        b = iv_bootstrap_test(table, B=300, alpha=0.05, seed=123)
        assert a == b

    def test_errors(self):
        counts = np.zeros((2, 2, 2), dtype=int)
        counts[0, 0, 0] = 5
        with pytest.raises(ValidationError, match="positivity"):
            iv_bootstrap_test(ContingencyTable(counts), B=200, alpha=0.05, seed=0)
        counts[1, 0, 0] = 5
        with pytest.raises(ValidationError):
            iv_bootstrap_test(ContingencyTable(counts), B=50, alpha=0.05, seed=0)


class TestManskiBounds:
    def test_from_probabilities(self):
        m = manski_bounds(np.array([[0.4, 0.1], [0.2, 0.3]]))
        assert (m.lower, m.upper) == (0.3, 0.8)

    def test_point_identification_under_full_treatment(self):
        m = manski_bounds(np.array([[0.0, 0.0], [0.3, 0.7]]))
        assert (m.lower, m.upper) == (0.7, 0.7)
        assert m.width == 0.0

    def test_vacuous_without_treatment(self):
        m = manski_bounds(np.array([[0.6, 0.4], [0.0, 0.0]]))
        assert (m.lower, m.upper) == (0.0, 1.0)

    def test_width_is_untreated_share_exactly(self, rng):
        for _ in range(100):
            counts = rng.integers(0, 30, size=(2, 2))
            if counts.sum() == 0:
                continue
            t = ContingencyTable(counts)
            m = manski_bounds(t)
            n = t.n
            assert m.lower == counts[1, 1] / n
            assert m.width == (n - counts[1, 0] - counts[1, 1]) / n
            assert m.upper == m.lower + m.width
            assert 0.0 <= m.lower <= m.upper <= 1.0

    def test_errors(self):
        with pytest.raises(ValidationError):
            manski_bounds(ContingencyTable(np.zeros((2, 2), dtype=int)))
        with pytest.raises(ValidationError):
            manski_bounds(np.array([[0.5, 0.5], [0.5, 0.5]]))
        with pytest.raises(ValidationError):
            manski_bounds(ContingencyTable(np.arange(8).reshape(2, 2, 2)))


class TestWilsonInterval:
    def test_boundary_counts_pin_endpoints(self):
        assert wilson_interval(0, 10, 0.95).lo == 0.0
        assert wilson_interval(10, 10, 0.95).hi == 1.0

    def test_contains_point_estimate(self):
        for n in (1, 10, 100):
            for k in range(n + 1):
                ci = wilson_interval(k, n, 0.95)
                assert ci.lo <= k / n <= ci.hi

    def test_symmetric_at_half(self):
        ci = wilson_interval(5, 10, 0.95)
        assert ci.lo + ci.hi == pytest.approx(1.0, abs=1e-12)
        assert ci.lo < 0.5 < ci.hi

    def test_matches_closed_form(self):
        k, n, level = 50, 100, 0.975
        z = norm.ppf((1 + level) / 2)
        phat = k / n
        denom = 1 + z**2 / n
        center = (phat + z**2 / (2 * n)) / denom
        half = (z / denom) * math.sqrt(phat * (1 - phat) / n + z**2 / (4 * n**2))
        ci = wilson_interval(k, n, level)
        assert ci.lo == pytest.approx(center - half, abs=1e-12)
        assert ci.hi == pytest.approx(center + half, abs=1e-12)

    def test_validation(self):
        with pytest.raises(ValidationError):
            wilson_interval(5, 10, 1.0)
        with pytest.raises(ValidationError):
            wilson_interval(11, 10, 0.9)


class TestNaiveTernary:
    def test_zero_threshold_never_rejects(self):
        t = ContingencyTable(np.array([[5, 5], [5, 5]]))
        assert naive_manski_ternary(t, 0.0, 0.95) is Outcome.DONT_REJECT

    def test_threshold_one_with_failures_rejects(self):
        t = ContingencyTable(np.array([[0, 0], [10, 90]]))
        assert naive_manski_ternary(t, 1.0, 0.95) is Outcome.REJECT

    def test_distant_bounds_reject(self):
        # bounds [0.3, 0.4] at n=10000, threshold well above the interval
        t = ContingencyTable(np.array([[700, 300], [6000, 3000]]))
        assert naive_manski_ternary(t, 0.5, 0.95) is Outcome.REJECT

    def test_wide_interval_is_unidentifiable(self):
        t = ContingencyTable(np.array([[40, 40], [10, 10]]))
        assert naive_manski_ternary(t, 0.5, 0.95) is Outcome.UNIDENTIFIABLE

    def test_outcome_walks_zero_two_one_in_c(self, rng):
        for _ in range(20):
            counts = rng.integers(0, 50, size=(2, 2))
            if counts.sum() == 0:
                continue
            t = ContingencyTable(counts)
            pattern = [
                int(naive_manski_ternary(t, c, 0.95)) for c in np.linspace(0, 1, 101)
            ]
            order = {0: 0, 2: 1, 1: 2}
            ranks = [order[o] for o in pattern]
            assert ranks == sorted(ranks)

    def test_validation(self):
        t = ContingencyTable(np.array([[5, 5], [5, 5]]))
        with pytest.raises(ValidationError):
            naive_manski_ternary(t, 1.5, 0.95)
        with pytest.raises(ValidationError):
            naive_manski_ternary(ContingencyTable(np.zeros((2, 2), dtype=int)), 0.5, 0.95)
