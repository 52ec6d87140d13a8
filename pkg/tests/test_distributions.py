import json
import math
from fractions import Fraction

import numpy as np
import pytest
from mpmath import mp

from momentlab import (
    DiscreteDistribution,
    DomainError,
    Partition,
    as_fraction,
    bernoulli,
    exponential,
    laplace,
    laplace_exact,
    moments_of,
    mu_of_partition,
    normalize_mean,
    parse_distribution_spec,
    point_mass,
    sample,
    uniform,
)
from momentlab.distributions import MomentProfile, load_distribution, one_minus_laplace_mp
from momentlab.precision import to_mpf, working_precision


class TestAsFraction:
    def test_parses_strings_exactly(self):
        assert as_fraction("2/3") == Fraction(2, 3)
        assert as_fraction("0.25") == Fraction(1, 4)
        assert as_fraction("7") == 7
        assert as_fraction(Fraction(1, 3)) == Fraction(1, 3)

    def test_rejects_floats_and_garbage(self):
        with pytest.raises(DomainError):
            as_fraction(0.5)
        with pytest.raises(DomainError):
            as_fraction("a over b")
        with pytest.raises(DomainError):
            as_fraction(True)


class TestDiscreteDistribution:
    def test_sorts_atoms_and_validates(self):
        d = DiscreteDistribution((("3", "1/2"), ("1", "1/2")))
        assert d.values == (1, 3)
        assert d.is_positive
        assert d.mean() == 2

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            DiscreteDistribution(())
        with pytest.raises(DomainError):
            DiscreteDistribution((("1", "1/2"), ("1", "1/2")))  # duplicate values
        with pytest.raises(DomainError):
            DiscreteDistribution((("1", "1/2"), ("2", "1/3")))  # sums to 5/6
        with pytest.raises(DomainError):
            DiscreteDistribution((("-1", "1/2"), ("2", "1/2")))
        with pytest.raises(DomainError):
            DiscreteDistribution((("1", "0"), ("2", "1")))

    def test_bernoulli_and_point(self):
        d = bernoulli("1/3")
        assert d.values == (0, 1) and d.probabilities == (Fraction(2, 3), Fraction(1, 3))
        assert not d.is_positive
        assert point_mass("3/2").values == (Fraction(3, 2),)
        with pytest.raises(DomainError):
            bernoulli("1")
        with pytest.raises(DomainError):
            point_mass("-1")


class TestMoments:
    def test_bernoulli_moments_all_theta(self):
        prof = moments_of(bernoulli("1/3"), 8)
        assert all(prof.mu(k) == Fraction(1, 3) for k in range(1, 9))
        assert prof.mu(0) == 1

    def test_point_mass_moments(self):
        prof = moments_of(point_mass("3/2"), 5)
        assert [prof.mu(k) for k in range(6)] == [Fraction(3, 2) ** k for k in range(6)]

    def test_two_atom_second_moment(self):
        prof = moments_of(DiscreteDistribution((("1", "1/2"), ("3", "1/2"))), 2)
        assert prof.mu(2) == 5  # (1 + 9) / 2

    def test_continuous_rejected(self):
        with pytest.raises(DomainError):
            moments_of(exponential("1"), 3)

    def test_profile_validation(self):
        with pytest.raises(DomainError):
            MomentProfile((Fraction(2), Fraction(1)))  # mu_0 != 1
        with pytest.raises(DomainError):
            MomentProfile((Fraction(1), Fraction(-1)))
        with pytest.raises(DomainError):
            # mu_1 = 2 but mu_2 = 1 < mu_1^2 breaks power-mean monotonicity
            MomentProfile((Fraction(1), Fraction(2), Fraction(1)))

    def test_power_mean_monotonicity_from_pool(self, pool10):
        for dist in pool10:
            prof = moments_of(dist, 8)
            for j in range(1, 8):
                assert prof.mu(j) ** (j + 1) <= prof.mu(j + 1) ** j


class TestNormalize:
    def test_example(self):
        prof = MomentProfile((Fraction(1), Fraction(2), Fraction(8)))
        assert normalize_mean(prof).moments == (1, 1, 2)

    def test_idempotent_on_pool(self, pool10):
        for dist in pool10:
            prof = normalize_mean(moments_of(dist, 6))
            assert normalize_mean(prof) == prof

    def test_point_mass_normalizes_to_ones(self):
        prof = normalize_mean(moments_of(point_mass("7/2"), 5))
        assert all(m == 1 for m in prof.moments)

    def test_zero_mean_rejected(self):
        with pytest.raises(DomainError):
            normalize_mean(moments_of(point_mass("0"), 3))


class TestMuOfPartition:
    def test_all_ones_is_one_when_normalized(self, pool10):
        q = Partition((1, 1, 1))
        for dist in pool10:
            prof = normalize_mean(moments_of(dist, 4))
            assert mu_of_partition(prof, q) == 1

    def test_product_example(self):
        prof = MomentProfile((Fraction(1), Fraction(1), Fraction(2)))
        assert mu_of_partition(prof, Partition((2, 1))) == 2

    def test_at_least_one_for_normalized(self, pool10):
        for dist in pool10:
            prof = normalize_mean(moments_of(dist, 6))
            for q in (Partition((2, 2)), Partition((1, 2, 3)), Partition((6,))):
                assert mu_of_partition(prof, q) >= 1

    def test_out_of_range_part(self):
        prof = MomentProfile((Fraction(1), Fraction(1)))
        with pytest.raises(DomainError):
            mu_of_partition(prof, Partition((2,)))


class TestLaplace:
    def test_point_mass_is_pure_exponential(self):
        for t in (0.0, 0.5, 2.0):
            assert laplace(point_mass("1"), t) == pytest.approx(math.exp(-t), abs=1e-15)

    def test_value_at_zero_is_one(self, pool10):
        for dist in pool10:
            assert laplace(dist, 0.0) == pytest.approx(1.0, abs=1e-15)

    def test_bernoulli_closed_form(self):
        d = bernoulli("1/2")
        for t in (0.3, 1.0, 4.0):
            assert laplace(d, t) == pytest.approx((1 + math.exp(-t)) / 2, abs=1e-15)

    def test_negative_t_rejected(self):
        with pytest.raises(DomainError):
            laplace(point_mass("1"), -0.1)
        with pytest.raises(DomainError):
            laplace_exact(point_mass("1"), -1)

    def test_exact_agrees_with_float(self, pool10):
        for dist in list(pool10)[:3] + [exponential("2"), uniform("0", "3"), uniform("1/2", "2")]:
            for t in (0.1, 1.0, 7.5):
                assert float(laplace_exact(dist, t)) == pytest.approx(laplace(dist, t), rel=1e-12)

    def test_uniform_against_quadrature(self):
        # independent oracle: numerically integrate exp(-t x) / (b - a) over [a, b]
        fam = uniform("1/2", "3")
        with working_precision(200):
            for t in (0.25, 1.0, 6.0):
                oracle = mp.quad(lambda x: mp.e ** (-t * x) / mp.mpf(2.5),
                                 [mp.mpf(0.5), mp.mpf(3)])
                assert abs(laplace_exact(fam, t) - oracle) < mp.mpf("1e-40")

    def test_log_laplace_is_convex(self, pool10):
        # F(l s + (1-l) t) <= F(s)^l F(t)^(1-l) at high precision
        pts = [(0.2, 1.7), (0.5, 3.0), (1.0, 9.0)]
        with working_precision(200):
            for dist in pool10:
                for s, t in pts:
                    Fs, Ft = laplace_exact(dist, s), laplace_exact(dist, t)
                    for lam_num in (1, 2, 3):
                        lam = to_mpf(Fraction(lam_num, 4))
                        lhs = laplace_exact(dist, lam * s + (1 - lam) * t)
                        rhs = Fs**lam * Ft ** (1 - lam)
                        assert lhs <= rhs * (1 + mp.mpf("1e-50"))

    def test_one_minus_laplace_stable_small_t(self, pool10):
        # relative agreement with a 400-bit direct difference down to tiny t
        for dist in list(pool10)[:3] + [uniform("1/4", "2")]:
            for t in (Fraction(1, 10), Fraction(1, 10**6), Fraction(1, 10**12)):
                with working_precision(400):
                    truth = 1 - laplace_exact(dist, t, 400)
                with working_precision(200):
                    got = one_minus_laplace_mp(dist, t)
                with working_precision(400):
                    assert abs(got - truth) <= abs(truth) * mp.mpf("1e-55")


class TestSample:
    def test_point_mass_constant(self):
        xs = sample(point_mass("5/4"), 1, 100)
        assert np.all(xs == 1.25)

    def test_bernoulli_mean_within_four_stderr(self):
        n = 40000
        xs = sample(bernoulli("1/3"), 7, n)
        stderr = math.sqrt((1 / 3) * (2 / 3) / n)
        assert abs(xs.mean() - 1 / 3) < 4 * stderr

    def test_seed_determinism(self):
        a = sample(exponential("2"), 123, 50)
        b = sample(exponential("2"), 123, 50)
        assert np.array_equal(a, b)

    def test_count_validation(self):
        with pytest.raises(DomainError):
            sample(point_mass("1"), 0, 0)

    def test_discrete_frequencies(self):
        d = DiscreteDistribution((("1", "1/4"), ("2", "3/4")))
        xs = sample(d, 5, 20000)
        assert abs((xs == 1.0).mean() - 0.25) < 0.02


class TestSpecFiles:
    def test_atoms_spec_roundtrip(self):
        spec = {"atoms": [{"value": "1/2", "prob": "1/3"}, {"value": "2", "prob": "2/3"}]}
        d = parse_distribution_spec(spec)
        assert d.values == (Fraction(1, 2), 2)
        assert parse_distribution_spec(d.spec_dict()) == d

    def test_family_specs(self):
        assert parse_distribution_spec({"family": "bernoulli", "theta": "1/3"}) == bernoulli("1/3")
        assert parse_distribution_spec({"family": "point", "value": "2"}) == point_mass("2")
        fam = parse_distribution_spec({"family": "exponential", "rate": "3/2"})
        assert fam.param("rate") == Fraction(3, 2)
        fam = parse_distribution_spec({"family": "uniform", "a": "0", "b": "1"})
        assert fam.param("b") == 1

    def test_floats_rejected(self):
        with pytest.raises(DomainError):
            parse_distribution_spec({"family": "bernoulli", "theta": 0.3})
        with pytest.raises(DomainError):
            parse_distribution_spec({"atoms": [{"value": 0.5, "prob": "1"}]})

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            parse_distribution_spec({"family": "zeta", "s": "2"})

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "dist.json"
        path.write_text(json.dumps({"atoms": [{"value": "1", "prob": "1/2"},
                                              {"value": "3", "prob": "1/2"}]}))
        assert load_distribution(str(path)).values == (1, 3)

    def test_load_rejects_float_literals(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"family": "bernoulli", "theta": 0.5}')
        with pytest.raises(DomainError):
            load_distribution(str(path))
