"""Distributions as sources of exact moments, Laplace-transform values and
random samples.

Finite-support laws carry exact rational atoms end-to-end.  Continuous laws
(exponential, uniform) enter only through closed-form Laplace transforms and
samplers registered in the family table; paths that need exact rational
moments reject them.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import mp, mpf

from .errors import DomainError
from .partitions import MAX_ORDER, Partition
from .precision import to_mpf, working_precision


def as_fraction(x) -> Fraction:
    """Exact rational from int, Fraction, or string like "2/3" or "0.25".

    Floats are rejected: they would silently contaminate exact paths.
    """
    if isinstance(x, bool):
        raise DomainError(f"not a rational: {x!r}")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise DomainError(f"cannot parse {x!r} as a rational (use the form 'a/b')")
    raise DomainError(f"rationals must be given as strings or integers, got {type(x).__name__}")


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite-support law with exact rational atom values and probabilities."""

    atoms: tuple[tuple[Fraction, Fraction], ...]  # (value, probability), sorted by value

    def __post_init__(self):
        atoms = tuple(sorted((as_fraction(v), as_fraction(p)) for v, p in self.atoms))
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise DomainError("a distribution needs at least one atom")
        values = [v for v, _ in atoms]
        if len(set(values)) != len(values):
            raise DomainError("atom values must be distinct")
        if any(v < 0 for v in values):
            raise DomainError("atom values must be nonnegative")
        if any(p <= 0 for _, p in atoms):
            raise DomainError("atom probabilities must be positive")
        total = sum(p for _, p in atoms)
        if total != 1:
            raise DomainError(f"probabilities must sum to 1 exactly, got {total}")

    @property
    def values(self) -> tuple[Fraction, ...]:
        return tuple(v for v, _ in self.atoms)

    @property
    def probabilities(self) -> tuple[Fraction, ...]:
        return tuple(p for _, p in self.atoms)

    @property
    def is_positive(self) -> bool:
        """True when every atom value is strictly positive (required for p < 0)."""
        return self.atoms[0][0] > 0

    @property
    def min_value(self) -> Fraction:
        return self.atoms[0][0]

    def prob_at_zero(self) -> Fraction:
        return self.atoms[0][1] if self.atoms[0][0] == 0 else Fraction(0)

    def mean(self) -> Fraction:
        return sum(p * v for v, p in self.atoms)

    def spec_dict(self) -> dict:
        return {"atoms": [{"value": str(v), "prob": str(p)} for v, p in self.atoms]}

    def __str__(self) -> str:
        return "{" + ", ".join(f"{v}:{p}" for v, p in self.atoms) + "}"


def bernoulli(theta) -> DiscreteDistribution:
    """Law of a {0,1}-valued variable with P(X=1) = theta."""
    theta = as_fraction(theta)
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0,1), got {theta}")
    return DiscreteDistribution(((Fraction(0), 1 - theta), (Fraction(1), theta)))


def point_mass(value) -> DiscreteDistribution:
    value = as_fraction(value)
    if value < 0:
        raise DomainError(f"point mass value must be nonnegative, got {value}")
    return DiscreteDistribution(((value, Fraction(1)),))


def is_bernoulli(dist) -> Fraction | None:
    """Return theta when dist is a {0,1} two-point law, else None."""
    if isinstance(dist, DiscreteDistribution) and dist.values == (Fraction(0), Fraction(1)):
        return dist.probabilities[1]
    return None


@dataclass(frozen=True)
class ContinuousFamily:
    """Named continuous law; enters through its Laplace transform and sampler only."""

    name: str
    params: tuple[tuple[str, Fraction], ...]

    def param(self, key: str) -> Fraction:
        for k, v in self.params:
            if k == key:
                return v
        raise KeyError(key)

    @property
    def is_positive(self) -> bool:
        # support of both registered families lies in (lo, hi) with lo >= 0,
        # so the variable is positive almost surely
        return True

    def laplace_tail_majorant(self) -> tuple[Fraction, int]:
        """(C, r) with F(t) <= C * t^(-r) for all t > 0."""
        if self.name == "exponential":
            return self.param("rate"), 1
        if self.name == "uniform":
            return 1 / (self.param("b") - self.param("a")), 1
        raise DomainError(f"no tail majorant for family {self.name!r}")

    def spec_dict(self) -> dict:
        return {"family": self.name, **{k: str(v) for k, v in self.params}}

    def __str__(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.params)
        return f"{self.name}({args})"


def exponential(rate) -> ContinuousFamily:
    rate = as_fraction(rate)
    if rate <= 0:
        raise DomainError(f"rate must be positive, got {rate}")
    return ContinuousFamily("exponential", (("rate", rate),))


def uniform(a, b) -> ContinuousFamily:
    a, b = as_fraction(a), as_fraction(b)
    if not 0 <= a < b:
        raise DomainError(f"need 0 <= a < b, got a={a}, b={b}")
    return ContinuousFamily("uniform", (("a", a), ("b", b)))


Distribution = DiscreteDistribution | ContinuousFamily


@dataclass(frozen=True)
class EstimateWithError:
    """A numerical value with an error bound.

    kind = "monte_carlo" (error_bound is a standard error), "quadrature"
    (absolute integration bound) or "direct" (rounding bound of a direct
    high-precision sum).  Values may be floats or mpmath reals.
    """

    value: object
    error_bound: float
    kind: str

    def __post_init__(self):
        if self.kind not in ("monte_carlo", "quadrature", "direct"):
            raise DomainError(f"unknown estimate kind {self.kind!r}")
        if not (float(self.error_bound) >= 0):
            raise DomainError(f"error bound must be >= 0, got {self.error_bound}")
        if not math.isfinite(float(self.value)):
            raise DomainError("estimate value must be finite")


@dataclass(frozen=True)
class MomentProfile:
    """Raw moments mu_0, mu_1, ..., mu_p_max of a nonnegative variable."""

    moments: tuple[Fraction, ...]

    def __post_init__(self):
        moments = tuple(as_fraction(m) for m in self.moments)
        object.__setattr__(self, "moments", moments)
        if not moments or moments[0] != 1:
            raise DomainError("mu_0 must equal 1")
        if any(m < 0 for m in moments):
            raise DomainError("moments must be nonnegative")
        # power-mean monotonicity, in the exact testable form mu_j^(j+1) <= mu_(j+1)^j
        for j in range(1, len(moments) - 1):
            if moments[j] ** (j + 1) > moments[j + 1] ** j:
                raise DomainError(f"moments violate power-mean monotonicity at order {j}")

    @property
    def p_max(self) -> int:
        return len(self.moments) - 1

    def mu(self, k: int) -> Fraction:
        if not 0 <= k <= self.p_max:
            raise DomainError(f"moment order {k} outside 0..{self.p_max}")
        return self.moments[k]

    def variance(self) -> Fraction:
        return self.mu(2) - self.mu(1) ** 2


def moments_of(dist: Distribution, p_max: int) -> MomentProfile:
    """Exact raw moments of a finite-support law up to order p_max."""
    if not isinstance(dist, DiscreteDistribution):
        raise DomainError(f"no exact moment path for continuous family {dist}")
    if p_max > MAX_ORDER:
        raise DomainError(f"p_max={p_max} exceeds the ceiling {MAX_ORDER}")
    mus = []
    for k in range(p_max + 1):
        mus.append(sum(p * v**k for v, p in dist.atoms))
    return MomentProfile(tuple(mus))


def normalize_mean(profile: MomentProfile) -> MomentProfile:
    """Moments of X / E[X]; the mean of the rescaled variable is 1."""
    mu1 = profile.mu(1) if profile.p_max >= 1 else Fraction(0)
    if mu1 == 0:
        raise DomainError("cannot normalize a profile with zero mean")
    return MomentProfile(tuple(m / mu1**k for k, m in enumerate(profile.moments)))


def mu_of_partition(profile: MomentProfile, q: Partition) -> Fraction:
    """Product of profile moments over the parts of q."""
    if max(q.parts) > profile.p_max:
        raise DomainError(f"partition needs moment order {max(q.parts)}, profile has {profile.p_max}")
    result = Fraction(1)
    for part in q.parts:
        result *= profile.mu(part)
    return result


def laplace(dist: Distribution, t: float) -> float:
    """E exp(-t X) in double precision; t >= 0."""
    if t < 0:
        raise DomainError(f"Laplace transform needs t >= 0, got {t}")
    t = float(t)
    if isinstance(dist, DiscreteDistribution):
        return sum(float(p) * math.exp(-t * float(v)) for v, p in dist.atoms)
    if dist.name == "exponential":
        lam = float(dist.param("rate"))
        return lam / (lam + t)
    if dist.name == "uniform":
        a, b = float(dist.param("a")), float(dist.param("b"))
        if t == 0:
            return 1.0
        # exp(-a t) * (1 - exp(-(b-a) t)) / ((b-a) t), written to avoid cancellation
        return math.exp(-a * t) * (-math.expm1(-(b - a) * t)) / ((b - a) * t)
    raise DomainError(f"unknown family {dist.name!r}")


def laplace_mp(dist: Distribution, t) -> mpf:
    """E exp(-t X) at the current mpmath working precision (t >= 0)."""
    if t < 0:
        raise DomainError(f"Laplace transform needs t >= 0, got {t}")
    t = to_mpf(t)
    if isinstance(dist, DiscreteDistribution):
        return sum(to_mpf(p) * mp.e ** (-t * to_mpf(v)) for v, p in dist.atoms)
    if dist.name == "exponential":
        lam = to_mpf(dist.param("rate"))
        return lam / (lam + t)
    if dist.name == "uniform":
        a, b = to_mpf(dist.param("a")), to_mpf(dist.param("b"))
        if t == 0:
            return mpf(1)
        return mp.e ** (-a * t) * (-mp.expm1(-(b - a) * t)) / ((b - a) * t)
    raise DomainError(f"unknown family {dist.name!r}")


def laplace_exact(dist: Distribution, t, bits: int | None = None) -> mpf:
    """High-precision Laplace transform value at configurable bit precision."""
    with working_precision(bits):
        return laplace_mp(dist, t)


def one_minus_laplace_mp(dist: Distribution, t) -> mpf:
    """E (1 - exp(-t X)) at working precision.

    Written to keep full relative precision for small t, where the direct
    1 - F(t) difference would cancel catastrophically.
    """
    if t < 0:
        raise DomainError(f"need t >= 0, got {t}")
    t = to_mpf(t)
    if t == 0:
        return mpf(0)
    if isinstance(dist, DiscreteDistribution):
        return -sum(to_mpf(p) * mp.expm1(-t * to_mpf(v)) for v, p in dist.atoms)
    if dist.name == "exponential":
        lam = to_mpf(dist.param("rate"))
        return t / (lam + t)
    if dist.name == "uniform":
        a, b = to_mpf(dist.param("a")), to_mpf(dist.param("b"))
        if b * t > 0.5:
            return 1 - laplace_mp(dist, t)
        # alternating moment series; ratio < 1/2 so truncation error < last term
        total = mpf(0)
        power = mpf(1)
        k = 1
        eps = mp.ldexp(1, -mp.prec - 10)
        while True:
            power *= -t / k
            mu_k = (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (b - a))
            term = -power * mu_k
            total += term
            if abs(term) < eps * abs(total):
                return total
            k += 1
    raise DomainError(f"unknown family {dist.name!r}")


def sample(dist: Distribution, rng_seed: int, count: int) -> np.ndarray:
    """count i.i.d. draws as float64; deterministic for a fixed seed."""
    if count < 1:
        raise DomainError(f"need count >= 1, got {count}")
    rng = np.random.default_rng(rng_seed)
    return _draw(dist, rng, count)


def _draw(dist: Distribution, rng: np.random.Generator, count: int) -> np.ndarray:
    if isinstance(dist, DiscreteDistribution):
        values = np.array([float(v) for v in dist.values])
        cum = np.cumsum([float(p) for p in dist.probabilities])
        cum[-1] = 1.0  # guard the last bin against rounding
        return values[np.searchsorted(cum, rng.random(count), side="left")]
    if dist.name == "exponential":
        return rng.exponential(scale=1.0 / float(dist.param("rate")), size=count)
    if dist.name == "uniform":
        return rng.uniform(float(dist.param("a")), float(dist.param("b")), size=count)
    raise DomainError(f"unknown family {dist.name!r}")


# ---------------------------------------------------------------------------
# distribution spec files:  {"atoms": [{"value": "1/2", "prob": "1/3"}, ...]}
# or {"family": "bernoulli", "theta": "1/3"}.  Rationals always as strings.

_FAMILY_PARSERS = {
    "bernoulli": lambda spec: bernoulli(_spec_field(spec, "theta")),
    "point": lambda spec: point_mass(_spec_field(spec, "value")),
    "exponential": lambda spec: exponential(_spec_field(spec, "rate")),
    "uniform": lambda spec: uniform(_spec_field(spec, "a"), _spec_field(spec, "b")),
}


def _spec_field(spec: dict, key: str):
    if key not in spec:
        raise DomainError(f"family {spec.get('family')!r} needs field {key!r}")
    value = spec[key]
    if isinstance(value, float):
        raise DomainError(f"field {key!r} must be a string rational like \"1/3\", not a float")
    return value


def parse_distribution_spec(spec: dict) -> Distribution:
    """Build a distribution from its JSON-style spec dictionary."""
    if not isinstance(spec, dict):
        raise DomainError(f"distribution spec must be an object, got {type(spec).__name__}")
    if "atoms" in spec:
        pairs = []
        for atom in spec["atoms"]:
            if isinstance(atom.get("value"), float) or isinstance(atom.get("prob"), float):
                raise DomainError("atom values and probs must be string rationals, not floats")
            pairs.append((atom["value"], atom["prob"]))
        return DiscreteDistribution(tuple(pairs))
    if "family" in spec:
        name = spec["family"]
        if name not in _FAMILY_PARSERS:
            raise DomainError(f"unknown family {name!r}; known: {sorted(_FAMILY_PARSERS)}")
        return _FAMILY_PARSERS[name](spec)
    raise DomainError("distribution spec needs either 'atoms' or 'family'")


def load_distribution(path: str) -> Distribution:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_distribution_spec(json.load(fh, parse_float=_reject_float))


def _reject_float(text):
    raise DomainError(f"float literal {text!r} in distribution spec; use string rationals")
