import json
import math

import numpy as np
import pytest
from scipy import stats

from ltrank import degree, gf2

TABLE = degree.SPIKED_RSD_S10


class TestSolitonCounts:
    def test_degree_one_count(self):
        assert degree.rsd_expected_counts(1000, 10)[1] == 11.0

    def test_degree_two_count(self):
        # n/(d(d-1)) + S/d at d=2
        assert degree.rsd_expected_counts(1000, 10)[2] == 505.0

    def test_total_close_to_log_formula(self):
        counts = degree.rsd_expected_counts(1000, 10)
        total = math.fsum(counts.values())
        assert total == pytest.approx(1074.8547086055034, rel=1e-12)
        assert total == pytest.approx(1000 + 10 * (1 + math.log(1000)),
                                      rel=0.005)

    def test_rejects_degenerate_parameters(self):
        with pytest.raises(ValueError):
            degree.rsd_expected_counts(1, 10)
        with pytest.raises(ValueError):
            degree.rsd_expected_counts(100, 0.5)


class TestNormalize:
    def test_uniform_counts(self):
        d = degree.rsd_normalize({1: 1.0, 2: 1.0})
        assert d.entries == {1: 0.5, 2: 0.5}

    def test_single_degree(self):
        assert degree.rsd_normalize({3: 7.0}).entries == {3: 1.0}

    def test_full_profile_head(self):
        d = degree.rsd_normalize(degree.rsd_expected_counts(1000, 10),
                                 n=1000)
        assert d.entries[1] == pytest.approx(11.0 / 1074.8547086055034)
        assert math.fsum(d.entries.values()) == pytest.approx(1.0, abs=1e-9)

    def test_rejects_empty_or_negative(self):
        with pytest.raises(ValueError):
            degree.rsd_normalize({})
        with pytest.raises(ValueError):
            degree.rsd_normalize({2: -1.0})


class TestDistributionValidation:
    def test_mass_must_sum_to_one(self):
        with pytest.raises(ValueError):
            degree.DegreeDistribution(n=10, entries={1: 0.5, 2: 0.4})

    def test_degree_bounds(self):
        with pytest.raises(ValueError):
            degree.DegreeDistribution(n=10, entries={11: 1.0})
        with pytest.raises(ValueError):
            degree.DegreeDistribution(n=10, entries={0: 1.0})

    def test_stock_fractions_sum_to_one(self):
        assert math.fsum(TABLE.values()) == pytest.approx(1.0, abs=1e-9)
        degree.example_distribution(100)  # validates on construction

    def test_dist_id_stable_and_distinct(self):
        a = degree.example_distribution(100)
        b = degree.example_distribution(100)
        c = degree.example_distribution(200)
        assert a.dist_id() == b.dist_id()
        assert a.dist_id() != c.dist_id()


class TestTruncate:
    def build_full(self):
        return degree.rsd_normalize(degree.rsd_expected_counts(1000, 10),
                                    n=1000)

    def test_reproduces_published_fractions_approximately(self):
        # exact reproduction is impossible (the published table was
        # hand-rounded and splits spike mass in an unstated way); the
        # generated fractions land within 0.015 of every entry and the
        # spike block carries exactly the residual mass
        out = degree.truncate(self.build_full(), 10, {25, 35},
                              gamma=0.1, eps=0.9)
        for d in range(1, 11):
            assert out.entries[d] == pytest.approx(TABLE[d], abs=0.015)
        spike_mass = out.entries[25] + out.entries[35]
        assert spike_mass == pytest.approx(TABLE[25] + TABLE[35], abs=0.02)
        small = sum(f for d, f in out.entries.items() if d <= 10)
        assert small + spike_mass == pytest.approx(1.0, abs=1e-9)

    def test_spike_split_proportional_to_source(self):
        full = self.build_full()
        out = degree.truncate(full, 10, {25, 35}, gamma=0.1, eps=0.9)
        ratio = out.entries[25] / out.entries[35]
        assert ratio == pytest.approx(full.entries[25] / full.entries[35],
                                      rel=1e-6)

    def test_noop_when_support_already_small(self):
        d = degree.DegreeDistribution(n=100, entries={1: 0.3, 2: 0.7})
        assert degree.truncate(d, 5, {2}, gamma=0.0, eps=0.5) is d

    def test_density_constraint_violation(self):
        with pytest.raises(degree.DensityConstraintViolated) as err:
            degree.truncate(self.build_full(), 10, {25, 35},
                            gamma=0.0, eps=0.001)
        assert err.value.average_degree < err.value.bound

    def test_spike_must_exist(self):
        d = degree.DegreeDistribution(n=100, entries={1: 0.3, 2: 0.7})
        with pytest.raises(ValueError):
            degree.truncate(d, 1, {50}, gamma=0.0, eps=0.9)


class TestAverageDegree:
    def test_degenerate(self):
        assert degree.average_row_degree(
            degree.DegreeDistribution(n=5, entries={1: 1.0})) == 1.0

    def test_two_point(self):
        d = degree.DegreeDistribution(n=10, entries={2: 0.5, 4: 0.5})
        assert degree.average_row_degree(d) == pytest.approx(3.0)

    def test_stock_table(self):
        d = degree.example_distribution(100)
        assert degree.average_row_degree(d) == pytest.approx(6.297,
                                                             abs=1e-12)


class TestColumnNullStats:
    def test_full_degree_rows_cover_everything(self):
        d = degree.DegreeDistribution(n=50, entries={50: 1.0})
        assert degree.column_null_stats(d, 50, 0.0).null_probability == 0.0

    def test_frozen_values_at_stock_table(self):
        # exact product and the exponential approximation diverge at
        # n=100 because the spike degrees are not small against n
        st = degree.column_null_stats(degree.example_distribution(100),
                                      100, 0.0)
        assert st.expected_null_columns == \
            pytest.approx(0.08675119370784616, rel=1e-9)
        assert st.expected_null_columns_approx == \
            pytest.approx(0.18418219630010635, rel=1e-9)

    def test_approximation_tight_at_design_length(self):
        st = degree.column_null_stats(degree.example_distribution(1000),
                                      1000, 0.0)
        assert st.expected_null_columns == \
            pytest.approx(st.expected_null_columns_approx, rel=0.15)

    def test_monotone_in_overhead(self):
        d = degree.example_distribution(100)
        vals = [degree.column_null_stats(d, 100, g).null_probability
                for g in (0.0, 0.5, 1.0, 2.0)]
        assert all(b < a for a, b in zip(vals, vals[1:]))


class TestSupplement:
    def test_zero_fraction_keeps_sparse_law(self):
        mu = degree.example_distribution(100)
        sup = degree.supplement(mu, 0.0)
        assert sup.combined_entries() == mu.entries

    def test_fraction_scales_sparse_mass(self):
        sup = degree.supplement(degree.example_distribution(100), 0.15)
        assert sup.dense_degree == 50
        combined = sup.combined_entries()
        assert combined[2] == pytest.approx(0.481 * 0.85)
        assert combined[50] == pytest.approx(0.15)
        assert math.fsum(combined.values()) == pytest.approx(1.0, abs=1e-9)

    def test_half_and_half(self):
        sup = degree.supplement(degree.example_distribution(100), 0.5)
        combined = sup.combined_entries()
        dense = combined[50]
        assert dense == pytest.approx(0.5)

    def test_block_length_override(self):
        sup = degree.supplement(degree.example_distribution(1000), 0.1,
                                block_n=100)
        assert sup.dense_degree == 50

    def test_fraction_bounds(self):
        with pytest.raises(ValueError):
            degree.supplement(degree.example_distribution(100), 1.0)


class TestSampling:
    def test_weight_one_rows(self):
        d = degree.DegreeDistribution(n=20, entries={1: 1.0})
        M = degree.sample_matrix(d, 20, 20, seed=3)
        assert (M.row_weights() == 1).all()

    def test_deterministic_given_seed(self):
        d = degree.example_distribution(100)
        a = degree.sample_matrix(d, 100, 50, seed=9)
        b = degree.sample_matrix(d, 100, 50, seed=9)
        c = degree.sample_matrix(d, 100, 50, seed=10)
        assert a == b
        assert a != c

    def test_mean_weight_tracks_average_degree(self):
        d = degree.example_distribution(100)
        M = degree.sample_matrix(d, 100, 10_000, seed=1)
        w = M.row_weights()
        se = w.std() / math.sqrt(len(w))
        assert abs(w.mean() - 6.297) <= 3 * se

    def test_degree_histogram_chi_square(self):
        d = degree.example_distribution(100)
        M = degree.sample_matrix(d, 100, 100_000, seed=2)
        w = M.row_weights()
        degs = d.degrees
        observed = np.array([(w == k).sum() for k in degs])
        expected = d.fractions * len(w)
        _, p = stats.chisquare(observed, expected)
        assert p > 0.001

    def test_supplemented_sampling(self):
        sup = degree.supplement(degree.example_distribution(100), 0.3)
        M = degree.sample_matrix(sup, 100, 5000, seed=4)
        frac50 = (M.row_weights() == 50).mean()
        assert frac50 == pytest.approx(0.3, abs=0.03)

    def test_degree_above_block_length_rejected(self):
        d = degree.example_distribution(1000)  # spike degree 35 fits, but
        with pytest.raises(ValueError):
            degree.sample_matrix(d, 20, 10, seed=0)  # n=20 cannot hold 35

    def test_rows_are_distinct_columns(self):
        d = degree.DegreeDistribution(n=30, entries={7: 1.0})
        M = degree.sample_matrix(d, 30, 200, seed=5)
        assert (M.row_weights() == 7).all()


class TestFiles:
    def test_sparse_round_trip_lossless(self, tmp_path):
        d = degree.rsd_normalize(degree.rsd_expected_counts(200, 7), n=200)
        path = tmp_path / "dist.json"
        degree.save_distribution(path, d)
        back = degree.load_distribution(path)
        assert back == d

    def test_supplemented_round_trip(self, tmp_path):
        sup = degree.supplement(degree.example_distribution(100), 0.125)
        path = tmp_path / "rho.json"
        degree.save_distribution(path, sup)
        back = degree.load_distribution(path)
        assert back == sup

    def test_zero_fraction_loads_as_sparse(self, tmp_path):
        mu = degree.example_distribution(100)
        path = tmp_path / "mu.json"
        degree.save_distribution(path, degree.supplement(mu, 0.0))
        assert degree.load_distribution(path) == mu

    def test_file_fields(self, tmp_path):
        path = tmp_path / "d.json"
        degree.save_distribution(path, degree.example_distribution(50))
        doc = json.loads(path.read_text())
        assert set(doc) == {"n", "soliton_s", "entries", "dense_fraction"}
        assert doc["dense_fraction"] == 0.0
