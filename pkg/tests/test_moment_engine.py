import itertools
import math
from fractions import Fraction

import pytest
from mpmath import mp

from momentlab import (
    ConfigError,
    DiscreteDistribution,
    DomainError,
    ExpDecayFunction,
    HingeFunction,
    PowerFunction,
    SizeLimitError,
    an_convolution_oracle,
    an_sequence,
    bernoulli,
    bn_bernoulli_stirling,
    bn_binomial_oracle,
    bn_convolution_oracle,
    bn_partition_formula,
    bn_partition_sequence,
    exponential,
    iid_sum_distribution,
    laplace_exact,
    moments_of,
    point_mass,
    random_rational_distributions,
)
from momentlab.precision import to_mpf, working_precision


def brute_force_bn(dist, p, n):
    """Oracle: enumerate all |atoms|^n outcomes of (X_1..X_n) directly."""
    total = Fraction(0)
    for combo in itertools.product(dist.atoms, repeat=n):
        prob = math.prod((c[1] for c in combo), start=Fraction(1))
        s = sum(c[0] for c in combo)
        total += prob * (s / Fraction(n)) ** p
    return total


class TestPartitionFormula:
    def test_p2_closed_form(self, pool10):
        for dist in pool10:
            prof = moments_of(dist, 2)
            mu1, var = prof.mu(1), prof.variance()
            for n in range(1, 15):
                assert bn_partition_formula(prof, 2, n) == mu1**2 + var / n

    def test_point_mass_gives_constant_powers(self):
        prof = moments_of(point_mass("1"), 9)
        for p in (1, 4, 7, 9):
            assert all(bn_partition_formula(prof, p, n) == 1 for n in range(1, 12))
        prof32 = moments_of(point_mass("3/2"), 7)
        assert all(bn_partition_formula(prof32, 7, n) == Fraction(3, 2) ** 7
                   for n in range(1, 8))

    def test_bernoulli_half_p2_n2(self):
        prof = moments_of(bernoulli("1/2"), 2)
        got = bn_partition_formula(prof, 2, 2)
        assert got == Fraction(3, 8)
        assert got == brute_force_bn(bernoulli("1/2"), 2, 2)

    def test_brute_force_agreement_small(self):
        for dist in random_rational_distributions(5, 4, atom_counts=(2, 3)):
            prof = moments_of(dist, 4)
            for p in (1, 2, 3, 4):
                for n in (1, 2, 3, 4):
                    assert bn_partition_formula(prof, p, n) == brute_force_bn(dist, p, n)

    def test_insufficient_profile_rejected(self):
        prof = moments_of(bernoulli("1/2"), 2)
        with pytest.raises(DomainError):
            bn_partition_formula(prof, 3, 2)

    def test_sequence_matches_pointwise(self, pool_small):
        for dist in pool_small:
            prof = moments_of(dist, 3)
            seq = bn_partition_sequence(prof, 3, (1, 12))
            for n in seq.n_range:
                assert seq.value_at(n) == bn_partition_formula(prof, 3, n)


class TestBernoulliStirling:
    def test_examples(self):
        assert bn_bernoulli_stirling("1/2", 2, 2) == Fraction(3, 8)
        for n in (1, 3, 9):
            assert bn_bernoulli_stirling("2/7", 1, n) == Fraction(2, 7)

    def test_truncation_below_p_matches_binomial(self):
        # n < p exercises the vanishing falling factorials
        for theta in (Fraction(1, 4), Fraction(9, 10)):
            for p in (3, 5, 6):
                for n in range(1, p):
                    assert bn_bernoulli_stirling(theta, p, n) == bn_binomial_oracle(theta, p, n)

    def test_theta_validation(self):
        with pytest.raises(DomainError):
            bn_bernoulli_stirling("0", 2, 2)
        with pytest.raises(DomainError):
            bn_bernoulli_stirling("3/2", 2, 2)


class TestBinomialOracle:
    def test_integer_example(self):
        assert bn_binomial_oracle("1/2", 2, 2) == Fraction(3, 8)

    def test_real_p_against_term_sum(self):
        # independent recomputation of sum C(3,k) (k/3)^(1/2) / 8 at 300 bits
        with working_precision(300):
            expected = sum(math.comb(3, k) * to_mpf(Fraction(k, 3)) ** mp.mpf(0.5) / 8
                           for k in range(1, 4))
        got = bn_binomial_oracle("1/2", Fraction(1, 2), 3, bits=300)
        with working_precision(300):
            assert abs(got - expected) < mp.mpf("1e-85")

    def test_nonpositive_p_rejected(self):
        with pytest.raises(DomainError):
            bn_binomial_oracle("1/2", 0, 3)
        with pytest.raises(DomainError):
            bn_binomial_oracle("1/2", -1, 3)

    def test_exact_cap(self):
        with pytest.raises(SizeLimitError):
            bn_binomial_oracle("1/2", 2, 10**4 + 1)


class TestConvolutionOracle:
    def test_point_mass(self):
        assert bn_convolution_oracle(point_mass("3/2"), 4, 5) == Fraction(3, 2) ** 4

    def test_matches_binomial_for_bernoulli(self):
        for theta in (Fraction(1, 3), Fraction(9, 10)):
            d = bernoulli(theta)
            for p in (1, 2, 5):
                for n in (1, 2, 7, 12):
                    assert bn_convolution_oracle(d, p, n) == bn_binomial_oracle(theta, p, n)

    def test_oracle_equivalence_sample(self):
        for dist in random_rational_distributions(11, 20):
            prof = moments_of(dist, 4)
            for p in (1, 2, 3, 4):
                for n in (1, 2, 5, 8):
                    assert bn_partition_formula(prof, p, n) == bn_convolution_oracle(dist, p, n)

    def test_negative_integer_p_exact(self):
        d = DiscreteDistribution((("1", "1/2"), ("2", "1/2")))
        # n=2: S in {2,3,4} with probs 1/4,1/2,1/4; E (S/2)^(-1) = 2 E 1/S
        expected = 2 * (Fraction(1, 4) / 2 + Fraction(1, 2) / 3 + Fraction(1, 4) / 4)
        assert bn_convolution_oracle(d, -1, 2) == expected

    def test_negative_p_needs_positive_support(self):
        with pytest.raises(DomainError):
            bn_convolution_oracle(bernoulli("1/2"), -1, 2)

    def test_size_caps(self):
        d = bernoulli("1/2")
        with pytest.raises(SizeLimitError):
            iid_sum_distribution(d, 31)
        seven = DiscreteDistribution(tuple((str(k), "1/7") for k in range(1, 8)))
        with pytest.raises(SizeLimitError):
            iid_sum_distribution(seven, 2)

    def test_sum_distribution_is_a_law(self, pool_small):
        for dist in pool_small:
            law = iid_sum_distribution(dist, 6)
            assert sum(law.values()) == 1
            assert all(p > 0 for p in law.values())


class TestAnSequence:
    def test_square_of_bernoulli_closed_form(self):
        theta = Fraction(1, 3)
        seq = an_sequence(bernoulli(theta), PowerFunction(2), (1, 10))
        for n in seq.n_range:
            assert seq.value_at(n) == theta**2 + theta * (1 - theta) / n
        assert set(seq.provenance) == {"partition_formula"}

    def test_hinge_exact_against_direct_binomial(self):
        # independent oracle: direct weighted sum over the binomial law
        theta, a = Fraction(1, 2), Fraction(1, 2)
        seq = an_sequence(bernoulli(theta), HingeFunction(a), (1, 6))
        for n in seq.n_range:
            expected = sum(Fraction(math.comb(n, k)) * theta**k * (1 - theta) ** (n - k)
                           * max(Fraction(k, n) - a, 0) for k in range(n + 1))
            assert seq.value_at(n) == expected
        assert set(seq.provenance) == {"convolution_oracle"}

    def test_exp_decay_is_laplace_power(self, pool_small):
        s = Fraction(2)
        for dist in pool_small:
            seq = an_sequence(dist, ExpDecayFunction(s), (1, 8), bits=200)
            for n in seq.n_range:
                with working_precision(200):
                    expected = laplace_exact(dist, Fraction(2, n), 200) ** n
                    assert abs(seq.value_at(n).value - expected) < mp.mpf("1e-55")
        assert set(seq.provenance) == {"laplace_power"}

    def test_auto_routes(self):
        d = bernoulli("1/3")
        assert an_sequence(d, PowerFunction(2), (1, 5)).provenance[0] == "partition_formula"
        assert an_sequence(d, PowerFunction(Fraction(1, 2)), (1, 5)).provenance[0] == "binomial_oracle"
        pos = DiscreteDistribution((("1", "1/2"), ("2", "1/2")))
        assert an_sequence(pos, PowerFunction(Fraction(1, 2)), (1, 3)).provenance[0] == "quadrature"
        assert an_sequence(pos, PowerFunction(Fraction(3, 2)), (1, 3)).provenance[0] == "convolution_oracle"
        assert an_sequence(exponential("1"), PowerFunction(2), (1, 3),
                           samples=1500, seed=1).provenance[0] == "monte_carlo"

    def test_incompatible_pairs_rejected(self):
        d = bernoulli("1/3")
        with pytest.raises(ConfigError):
            an_sequence(d, PowerFunction(2), (1, 5), method="quadrature")
        with pytest.raises(ConfigError):
            an_sequence(d, PowerFunction(Fraction(1, 2)), (1, 5), method="exact")
        with pytest.raises(ConfigError):
            an_sequence(point_mass("2"), PowerFunction(2), (1, 5), method="exact-binomial")
        with pytest.raises(ConfigError):
            an_sequence(exponential("1"), HingeFunction(Fraction(1, 2)), (1, 5),
                        method="exact-convolution")
        with pytest.raises(ConfigError):
            an_sequence(d, PowerFunction(2), (1, 5), method="newton")
        with pytest.raises(DomainError):
            an_sequence(d, PowerFunction(0), (1, 5))

    def test_negative_p_atom_at_zero_rejected(self):
        with pytest.raises(DomainError):
            an_sequence(bernoulli("1/2"), PowerFunction(-1), (1, 5))

    def test_nonincreasing_for_convex_powers(self, pool10):
        for dist in pool10:
            for p in (1, 2, 3):
                seq = an_sequence(dist, PowerFunction(p), (1, 15))
                vals = [seq.value_at(n) for n in seq.n_range]
                assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_limit_approach(self, pool10):
        # b_n decreases to mu_1^p; the gap roughly halves from n to 2n
        for dist in list(pool10)[:4]:
            prof = moments_of(dist, 3)
            lim = prof.mu(1) ** 3
            b32 = bn_partition_formula(prof, 3, 32)
            b64 = bn_partition_formula(prof, 3, 64)
            assert b64 - lim >= 0
            assert b64 - lim <= Fraction(7, 10) * (b32 - lim)

    def test_every_engine_on_point_mass(self):
        c, p = Fraction(3, 2), 5
        pm = point_mass(c)
        prof = moments_of(pm, p)
        assert bn_partition_formula(prof, p, 9) == c**p
        assert bn_convolution_oracle(pm, p, 9) == c**p
        assert an_convolution_oracle(pm, HingeFunction(Fraction(1)), 9) == c - 1
