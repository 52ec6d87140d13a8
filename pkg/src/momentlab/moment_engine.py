"""Exact and oracle engines for b_n = E ((X_1+...+X_n)/n)^p and the general
a_n = E f((X_1+...+X_n)/n).

Three independent routes exist for discrete laws: the partition-class
formula (moments + combinatorial coefficients), the Bernoulli closed forms
(Stirling and binomial sums), and brute-force convolution of the n-fold sum.
Their exact agreement is the backbone of the test suite.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from mpmath import mp, mpf

from .distributions import (
    DiscreteDistribution,
    Distribution,
    EstimateWithError,
    MomentProfile,
    as_fraction,
    is_bernoulli,
    moments_of,
    mu_of_partition,
)
from .analytic import (
    _range_bounds,
    an_monte_carlo,
    an_quadrature_fractional_p,
    an_quadrature_negative_p,
    u_n,
)
from .errors import ConfigError, DomainError, SizeLimitError
from .partitions import MAX_ORDER, enumerate_partitions, beta, falling_factorial, stirling2
from .precision import default_precision, to_mpf, working_precision
from .sequences import (
    ExpDecayFunction,
    FunctionDescriptor,
    HingeFunction,
    MomentSequence,
    PowerFunction,
)

# exact convolution caps: state spaces stay under ~10^6 entries; exceeding
# them raises, never silently approximates
CONVOLUTION_MAX_N = 30
CONVOLUTION_MAX_ATOMS = 6
CONVOLUTION_MAX_STATES = 10**6

BINOMIAL_EXACT_MAX_N = 10**4

METHODS = ("auto", "exact", "exact-binomial", "exact-convolution", "quadrature", "monte_carlo")


@lru_cache(maxsize=256)
def _partition_classes(p: int) -> tuple[tuple[int, tuple[tuple[int, tuple[int, ...]], ...]], ...]:
    """Per m: the (beta(q), parts) data for every partition class of p."""
    return tuple(
        (m, tuple((beta(q), q.parts) for q in enumerate_partitions(p, m)))
        for m in range(1, p + 1)
    )


def _partition_weights(profile: MomentProfile, p: int) -> list[Fraction]:
    """W[m] = sum over q in Q_m of beta(q) mu(q); W[0] unused."""
    weights = [Fraction(0)] * (p + 1)
    for m, classes in _partition_classes(p):
        total = Fraction(0)
        for b, parts in classes:
            term = Fraction(b)
            for part in parts:
                term *= profile.mu(part)
            total += term
        weights[m] = total
    return weights


def _validate_order(p: int, profile: MomentProfile | None = None) -> None:
    if not isinstance(p, int) or p < 1:
        raise DomainError(f"need integer p >= 1, got {p!r}")
    if p > MAX_ORDER:
        raise DomainError(f"p={p} exceeds the ceiling {MAX_ORDER}")
    if profile is not None and profile.p_max < p:
        raise DomainError(f"profile covers order {profile.p_max}, need {p}")


def bn_partition_formula(profile: MomentProfile, p: int, n: int) -> Fraction:
    """Exact E ((X_1+...+X_n)/n)^p from the partition-class expansion.

    Classes with more parts than n vanish through the falling factorial.
    """
    _validate_order(p, profile)
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    weights = _partition_weights(profile, p)
    total = Fraction(0)
    for m in range(1, p + 1):
        total += falling_factorial(n, m) * weights[m]
    return total / Fraction(n**p)


def bn_partition_sequence(profile: MomentProfile, p: int, n_range) -> MomentSequence:
    """Exact b_n over a contiguous range, reusing the per-class weights."""
    _validate_order(p, profile)
    n_lo, n_hi = _range_bounds(n_range)
    weights = _partition_weights(profile, p)
    values = []
    for n in range(n_lo, n_hi + 1):
        total = Fraction(0)
        for m in range(1, p + 1):
            total += falling_factorial(n, m) * weights[m]
        values.append(total / Fraction(n**p))
    width = n_hi - n_lo + 1
    return MomentSequence(PowerFunction(p), n_lo, tuple(values),
                          ("partition_formula",) * width)


def bn_bernoulli_stirling(theta, p: int, n: int) -> Fraction:
    """Exact Bernoulli b_n via the Stirling-number closed form."""
    theta = as_fraction(theta)
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0,1), got {theta}")
    _validate_order(p)
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    total = Fraction(0)
    for k in range(1, p + 1):
        total += stirling2(p, k) * falling_factorial(n, k) * theta**k
    return total / Fraction(n**p)


def bn_binomial_oracle(theta, p, n: int, bits: int | None = None):
    """Bernoulli b_n by direct summation over the binomial law.

    Exact Fraction for integer p >= 1; a high-precision value for real
    p > 0 (the k = 0 term uses the convention (0/n)^p = 0).
    """
    theta = as_fraction(theta)
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0,1), got {theta}")
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    p = Fraction(p) if isinstance(p, float) else as_fraction(p)
    if p <= 0:
        raise DomainError("binomial oracle needs p > 0 (mass at 0 makes p <= 0 undefined)")
    if p.denominator == 1:
        if n > BINOMIAL_EXACT_MAX_N:
            raise SizeLimitError(f"exact binomial sum capped at n={BINOMIAL_EXACT_MAX_N}")
        e = int(p)
        total = Fraction(0)
        for k in range(1, n + 1):
            weight = Fraction(math.comb(n, k)) * theta**k * (1 - theta) ** (n - k)
            total += weight * Fraction(k, n) ** e
        return total
    with working_precision(bits):
        pm = to_mpf(p)
        total = mpf(0)
        for k in range(1, n + 1):
            weight = Fraction(math.comb(n, k)) * theta**k * (1 - theta) ** (n - k)
            total += to_mpf(weight) * to_mpf(Fraction(k, n)) ** pm
        return total


def iid_sum_walk(dist: DiscreteDistribution, n_max: int):
    """Yield (n, law of X_1+...+X_n as a value->prob dict) for n = 1..n_max."""
    if not isinstance(dist, DiscreteDistribution):
        raise DomainError("exact convolution needs a finite-support distribution")
    if n_max > CONVOLUTION_MAX_N:
        raise SizeLimitError(f"exact convolution capped at n={CONVOLUTION_MAX_N}, asked for {n_max}")
    if len(dist.atoms) > CONVOLUTION_MAX_ATOMS:
        raise SizeLimitError(f"exact convolution capped at {CONVOLUTION_MAX_ATOMS} atoms, "
                             f"got {len(dist.atoms)}")
    current: dict[Fraction, Fraction] = dict(dist.atoms)
    yield 1, current
    for n in range(2, n_max + 1):
        nxt: dict[Fraction, Fraction] = {}
        for s, ps in current.items():
            for v, pv in dist.atoms:
                key = s + v
                if key in nxt:
                    nxt[key] += ps * pv
                else:
                    nxt[key] = ps * pv
        if len(nxt) > CONVOLUTION_MAX_STATES:
            raise SizeLimitError(f"sum support exceeded {CONVOLUTION_MAX_STATES} states at n={n}")
        current = nxt
        yield n, current


def iid_sum_distribution(dist: DiscreteDistribution, n: int) -> dict[Fraction, Fraction]:
    """Exact law of the n-fold sum as a value -> probability dict."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    for k, law in iid_sum_walk(dist, n):
        if k == n:
            return law
    raise AssertionError("unreachable")


def _expect_on_sum(sum_law: dict[Fraction, Fraction], n: int, f: FunctionDescriptor,
                   bits: int | None):
    """E f(S_n / n) from the explicit law of S_n; Fraction when exact."""
    if isinstance(f, HingeFunction):
        a = f.threshold
        return sum(p * (s / n - a) for s, p in sum_law.items() if s / n > a) or Fraction(0)
    if isinstance(f, PowerFunction):
        e = f.exponent
        if isinstance(e, int):
            return sum(p * (s / n) ** e for s, p in sum_law.items())
        with working_precision(bits):
            pm = to_mpf(e)
            total = mpf(0)
            for s, p in sum_law.items():
                if s != 0:
                    total += to_mpf(p) * to_mpf(s / Fraction(n)) ** pm
            return total
    raise DomainError(f"convolution oracle does not evaluate {f!r}")


def an_convolution_oracle(dist: DiscreteDistribution, f: FunctionDescriptor, n: int,
                          bits: int | None = None):
    """Independent oracle: E f(S_n/n) from the full distribution of S_n."""
    if isinstance(f, PowerFunction) and f.exponent < 0 and not dist.is_positive:
        raise DomainError("negative exponents need a strictly positive support")
    return _expect_on_sum(iid_sum_distribution(dist, n), n, f, bits)


def bn_convolution_oracle(dist: DiscreteDistribution, p, n: int, bits: int | None = None):
    """E (S_n/n)^p by exact convolution; Fraction for integer p."""
    p = Fraction(p) if isinstance(p, float) else as_fraction(p)
    exponent = int(p) if p.denominator == 1 else p
    return an_convolution_oracle(dist, PowerFunction(exponent), n, bits)


# ---------------------------------------------------------------------------
# sequence assembly with method dispatch

def _rounding_floor(value, bits: int) -> float:
    return float(mp.ldexp(1 + abs(mpf(value)), -bits + 8))


def an_sequence(dist: Distribution, f: FunctionDescriptor, n_range,
                method: str = "auto", *, bits: int | None = None,
                samples: int = 10000, seed: int = 0) -> MomentSequence:
    """a_n = E f((X_1+...+X_n)/n) over a contiguous n range.

    method "auto" prefers exact engines whenever the (f, distribution) pair
    allows, then quadrature, then Monte Carlo.  The chosen route is echoed
    in each entry's provenance tag.
    """
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; known: {METHODS}")
    n_lo, n_hi = _range_bounds(n_range)
    ns = range(n_lo, n_hi + 1)
    if isinstance(f, PowerFunction):
        return _power_sequence(dist, f, ns, method, bits, samples, seed)
    if isinstance(f, HingeFunction):
        if method in ("auto", "exact", "exact-convolution"):
            if isinstance(dist, DiscreteDistribution):
                return _convolution_sequence(dist, f, ns, bits)
            if method == "auto":
                return an_monte_carlo(dist, f, ns, samples, seed)
            raise ConfigError(f"method {method!r} needs a finite-support distribution")
        if method == "monte_carlo":
            return an_monte_carlo(dist, f, ns, samples, seed)
        raise ConfigError(f"method {method!r} does not apply to {f.label()}")
    if isinstance(f, ExpDecayFunction):
        if method in ("auto", "exact"):
            return _laplace_power_sequence(dist, f, ns, bits)
        if method == "monte_carlo":
            return an_monte_carlo(dist, f, ns, samples, seed)
        raise ConfigError(f"method {method!r} does not apply to {f.label()}")
    raise ConfigError(f"unknown function descriptor {f!r}")


def _power_sequence(dist, f: PowerFunction, ns: range, method: str,
                    bits, samples, seed) -> MomentSequence:
    e = f.exponent
    if e == 0:
        raise DomainError("p = 0 is excluded (the sequence is constant 1)")
    discrete = isinstance(dist, DiscreteDistribution)
    if e < 0 and discrete and not dist.is_positive:
        raise DomainError("p < 0 needs a strictly positive support (atom at 0 present)")
    if method == "auto":
        if isinstance(e, int) and e >= 1:
            method = "exact" if discrete else "monte_carlo"
        elif e > 0 and is_bernoulli(dist) is not None:
            method = "exact-binomial"  # exact weights beat quadrature here
        elif e < 0 or 0 < e < 1:
            method = "quadrature"
        else:  # non-integer p > 1: no integral representation applies
            method = "exact-convolution" if discrete else "monte_carlo"

    if method == "exact":
        if not (isinstance(e, int) and e >= 1):
            raise ConfigError(f"method 'exact' needs integer p >= 1, got p={e}")
        if not discrete:
            raise ConfigError("method 'exact' needs a finite-support distribution")
        profile = moments_of(dist, e)
        return bn_partition_sequence(profile, e, ns)

    if method == "exact-binomial":
        theta = is_bernoulli(dist)
        if theta is None:
            raise ConfigError("method 'exact-binomial' needs a Bernoulli distribution")
        if isinstance(e, int):
            values = tuple(bn_binomial_oracle(theta, e, n) for n in ns)
            return MomentSequence(f, ns.start, values, ("binomial_oracle",) * len(ns))
        used = default_precision() if bits is None else bits
        values = tuple(
            EstimateWithError(v := bn_binomial_oracle(theta, e, n, bits), _rounding_floor(v, used), "direct")
            for n in ns
        )
        return MomentSequence(f, ns.start, values, ("binomial_oracle",) * len(ns), used)

    if method == "exact-convolution":
        if not discrete:
            raise ConfigError("method 'exact-convolution' needs a finite-support distribution")
        return _convolution_sequence(dist, f, ns, bits)

    if method == "quadrature":
        if not (e < 0 or 0 < e < 1):
            raise ConfigError(f"quadrature applies to p < 0 or 0 < p < 1, got p={e}")
        used = default_precision() if bits is None else bits
        route = an_quadrature_negative_p if e < 0 else an_quadrature_fractional_p
        values = tuple(route(dist, e, n, bits) for n in ns)
        return MomentSequence(f, ns.start, values, ("quadrature",) * len(ns), used)

    if method == "monte_carlo":
        return an_monte_carlo(dist, f, ns, samples, seed)

    raise ConfigError(f"method {method!r} does not apply to {f.label()}")


def _convolution_sequence(dist: DiscreteDistribution, f: FunctionDescriptor,
                          ns: range, bits) -> MomentSequence:
    if isinstance(f, PowerFunction) and f.exponent < 0 and not dist.is_positive:
        raise DomainError("negative exponents need a strictly positive support")
    exact = isinstance(f, HingeFunction) or (
        isinstance(f, PowerFunction) and isinstance(f.exponent, int))
    used = None if exact else (default_precision() if bits is None else bits)
    values = []
    for n, law in iid_sum_walk(dist, ns.stop - 1):
        if n < ns.start:
            continue
        v = _expect_on_sum(law, n, f, bits)
        if exact:
            values.append(v)
        else:
            values.append(EstimateWithError(v, _rounding_floor(v, used), "direct"))
    return MomentSequence(f, ns.start, tuple(values),
                          ("convolution_oracle",) * len(ns), used)


def _laplace_power_sequence(dist: Distribution, f: ExpDecayFunction, ns: range,
                            bits) -> MomentSequence:
    used = default_precision() if bits is None else bits
    values = []
    for n in ns:
        v = u_n(dist, f.rate, n, bits)
        values.append(EstimateWithError(v, _rounding_floor(v, used), "direct"))
    return MomentSequence(f, ns.start, tuple(values), ("laplace_power",) * len(ns), used)
