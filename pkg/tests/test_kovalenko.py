import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from ltrank import kovalenko as kv


def chain_sum_brute(gain, length):
    """Direct nested summation over nondecreasing chains (oracle)."""
    if length == 0:
        return 1.0
    total = 0.0
    for chain in itertools.product(range(gain + 1), repeat=length):
        if all(a <= b for a, b in zip(chain, chain[1:])):
            total += 2.0 ** -sum(chain)
    return total


class TestChainSums:
    def test_boundaries_are_one(self):
        table = kv.chain_sums(6, 6)
        assert np.allclose(table[0, :], 1.0)
        assert np.allclose(table[:, 0], 1.0)

    def test_length_one_closed_form(self):
        # geometric sum: 2 - 2^-gain
        table = kv.chain_sums(10, 1)
        for g in range(11):
            assert table[g, 1] == pytest.approx(2.0 - 2.0 ** -g, abs=1e-15)

    @pytest.mark.parametrize("gain,length",
                             [(1, 1), (2, 2), (3, 2), (2, 3), (4, 3), (3, 4)])
    def test_matches_brute_force(self, gain, length):
        got = kv.chain_sums(gain, length)[gain, length]
        assert got == pytest.approx(chain_sum_brute(gain, length),
                                    rel=1e-12)

    def test_nondecreasing_and_bounded(self):
        table = kv.chain_sums(20, 20)
        assert (np.diff(table, axis=0) >= 0).all()
        assert (np.diff(table, axis=1) >= 0).all()
        bound = np.prod(1.0 / (1.0 - 0.5 ** np.arange(1, 21)))
        assert table.max() <= bound

    def test_negative_bounds_rejected(self):
        with pytest.raises(ValueError):
            kv.chain_sums(-1, 3)


class TestRankGainProb:
    def test_zero_deficiency_needs_no_repair(self):
        for k in range(6):
            assert kv.rank_gain_prob(0, 0, k) == 1.0

    def test_single_row_single_deficiency(self):
        # one fair-coin row escapes the hyperplane with probability 1/2
        assert kv.rank_gain_prob(1, 1, 1) == pytest.approx(0.5)
        assert kv.rank_gain_prob(1, 0, 1) == pytest.approx(0.5)

    def test_pmf_normalizes(self):
        for eta in range(0, 41, 8):
            for k in range(0, 41, 8):
                assert kv.rank_gain_pmf(eta, k).sum() == \
                    pytest.approx(1.0, abs=1e-9)

    def test_closed_form_matches_recursion(self):
        for eta in range(0, 21, 4):
            for k in range(0, 21, 4):
                for w in range(min(eta, k) + 1):
                    a = kv.rank_gain_prob(eta, w, k)
                    b = kv.rank_gain_prob_recursive(eta, w, k)
                    assert abs(a - b) <= 1e-12 * max(a, b, 1e-300)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            kv.rank_gain_prob(2, 3, 5)
        with pytest.raises(ValueError):
            kv.rank_gain_prob_recursive(2, 1, 0)


class TestFullRankLimit:
    def test_no_excess_rows(self):
        assert kv.kfrl(0, 100) == pytest.approx(0.7112119049133976,
                                                rel=1e-12)

    def test_square_limit_is_zero(self):
        assert kv.kfrl(100, 100) == 0.0
        assert kv.kfrl(150, 100) == 0.0

    def test_strictly_decreasing(self):
        vals = [kv.kfrl(k, 100) for k in range(100)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_two_power_approximation(self):
        # the 2^-k approximation holds to 0.5% while n - k >= 8;
        # beyond that the finite product truncation dominates
        for k in range(10, 93):
            assert kv.kfrl(k, 100) == pytest.approx(2.0 ** -k, rel=5e-3)
        assert abs(kv.kfrl(95, 100) / 2.0 ** -95 - 1.0) > 5e-3

    def test_overhead_paper_points(self):
        assert kv.kfro(1e-4, 100) == Fraction(14, 100)
        assert kv.kfro(1e-6, 100) == Fraction(20, 100)
        assert kv.kfro(1e-6, 500) == Fraction(20, 500)

    def test_overhead_monotone_in_delta(self):
        assert kv.kfro(1e-2, 100) <= kv.kfro(1e-4, 100)

    def test_overhead_rejects_bad_delta(self):
        with pytest.raises(ValueError):
            kv.kfro(0.0, 100)
        with pytest.raises(ValueError):
            kv.kfro(1.0, 100)


class TestDenseRankPmf:
    def test_normalizes(self):
        for n, k in [(8, 0), (16, 2), (64, 5), (200, 20)]:
            assert kv.dense_rank_pmf(n, k).sum() == \
                pytest.approx(1.0, abs=1e-9)

    def test_full_rank_limit_consistency(self):
        # rank-deficiency probability of the dense ensemble can never
        # beat the limit
        for n, k in [(16, 2), (100, 5), (100, 14), (500, 20)]:
            pmf = kv.dense_rank_pmf(n, k)
            assert 1.0 - pmf[0] >= kv.kfrl(k, n) - 1e-12

    def test_upper_bound_dominates(self):
        for n, k in [(16, 2), (60, 4)]:
            pmf = kv.dense_rank_pmf(n, k)
            for s in range(n + 1):
                assert pmf[s] <= kv.dense_rank_upper_bound(n, k, s) + 1e-15

    def test_square_case_matches_known_constant(self):
        # P(random square binary matrix invertible) -> ~0.2888
        pmf = kv.dense_rank_pmf(80, 0)
        assert pmf[0] == pytest.approx(0.2887880950866024, rel=1e-9)

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            kv.dense_rank_pmf(0, 2)
        with pytest.raises(ValueError):
            kv.dense_rank_pmf(8, -1)
