"""Verdict engines for log-convexity / log-concavity claims.

A sequence (x_n) is log-convex when x_n^2 <= x_(n-1) x_(n+1) for every
interior n, log-concave when the reverse inequality holds.  Exact sequences
get exact verdicts; estimated sequences get interval verdicts that never
report a violation the error bounds cannot support.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import mpf

from .distributions import (
    DiscreteDistribution,
    Distribution,
    EstimateWithError,
    MomentProfile,
    as_fraction,
)
from .errors import DomainError
from .moment_engine import an_sequence, bn_partition_formula, bn_partition_sequence
from .partitions import falling_factorial
from .precision import default_precision, to_mpf, working_precision
from .sequences import MomentSequence, PowerFunction, _encode_value

# an estimated slack counts as a violation only when it exceeds the
# propagated error bound by this factor; otherwise the verdict is
# inconclusive rather than a possibly-false counterexample
VIOLATION_SAFETY_FACTOR = 4

# exact sides of mixed comparisons are converted at no less than this
MIN_CHECK_BITS = 200


@dataclass(frozen=True)
class ViolationCertificate:
    """The offending index with its (x_(n-1), x_n, x_(n+1)) triple."""

    n: int
    triple: tuple

    def to_json_dict(self) -> dict:
        out = []
        for v in self.triple:
            if isinstance(v, Fraction):
                out.append({"value": str(v), "error_bound": "0"})
            else:
                value_str, bound_str = _encode_value(v)
                out.append({"value": value_str, "error_bound": bound_str})
        return {"n": self.n, "triple": out}


@dataclass(frozen=True)
class SequenceVerdict:
    claim: str                  # "log_convex" | "log_concave"
    status: str                 # holds_exact | holds_within_tolerance | violated | inconclusive
    margin: object              # minimum signed slack over the scanned n
    first_violation: ViolationCertificate | None
    scanned: tuple[int, int]    # inclusive n window of checked inequalities
    precision_bits: int | None
    provenance: tuple[str, ...] = ()
    details: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.status in ("holds_exact", "holds_within_tolerance")

    def to_json_dict(self) -> dict:
        return {
            "claim": self.claim,
            "status": self.status,
            "margin": str(self.margin) if isinstance(self.margin, Fraction) else float(self.margin),
            "certificate": self.first_violation.to_json_dict() if self.first_violation else None,
            "scanned": list(self.scanned),
            "provenance": sorted(set(self.provenance)),
            "precision_bits": self.precision_bits,
            **({"details": self.details} if self.details else {}),
        }


def _slacks_exact(values: list[Fraction], sign: int) -> list[Fraction]:
    return [sign * (values[i - 1] * values[i + 1] - values[i] ** 2)
            for i in range(1, len(values) - 1)]


def _check_exact(seq: MomentSequence, claim: str, sign: int) -> SequenceVerdict:
    values = list(seq.values)
    slacks = _slacks_exact(values, sign)
    margin = min(slacks)
    first = None
    for i, s in enumerate(slacks):
        if s < 0:
            n = seq.n_start + 1 + i
            first = ViolationCertificate(n, tuple(values[i:i + 3]))
            break
    status = "holds_exact" if first is None else "violated"
    return SequenceVerdict(claim, status, margin, first,
                           (seq.n_start + 1, seq.n_start + len(values) - 2),
                           seq.precision_bits, seq.provenance)


def _center_bound(v, conv_bits: int):
    if isinstance(v, Fraction):
        return to_mpf(v), mpf(0)
    return to_mpf(v.value), to_mpf(v.error_bound)


def _check_estimates(seq: MomentSequence, claim: str, sign: int,
                     bits: int | None) -> SequenceVerdict:
    conv_bits = max(bits or default_precision(), MIN_CHECK_BITS)
    with working_precision(conv_bits):
        cb = [_center_bound(v, conv_bits) for v in seq.values]
        margin = None
        first = None
        inconclusive = False
        for i in range(1, len(cb) - 1):
            (cl, el), (cc, ec), (cr, er) = cb[i - 1], cb[i], cb[i + 1]
            s = sign * (cl * cr - cc * cc)
            bound = cl * er + cr * el + el * er + 2 * cc * ec + ec * ec
            if margin is None or s < margin:
                margin = s
            if s < 0 and -s > VIOLATION_SAFETY_FACTOR * bound:
                if first is None:
                    n = seq.n_start + 1 + i
                    first = ViolationCertificate(n, tuple(seq.values[i - 1:i + 2]))
            elif s - bound < 0:
                inconclusive = True
    if first is not None:
        status = "violated"
    elif inconclusive:
        status = "inconclusive"
    else:
        status = "holds_within_tolerance"
    return SequenceVerdict(claim, status, margin, first,
                           (seq.n_start + 1, seq.n_start + len(cb) - 2),
                           seq.precision_bits or conv_bits, seq.provenance)


def _check(seq: MomentSequence, claim: str, bits: int | None) -> SequenceVerdict:
    if len(seq.values) < 3:
        raise DomainError(f"need at least 3 entries to check, got {len(seq.values)}")
    sign = 1 if claim == "log_convex" else -1
    if seq.is_exact:
        return _check_exact(seq, claim, sign)
    return _check_estimates(seq, claim, sign, bits)


def check_log_convex(seq: MomentSequence, bits: int | None = None) -> SequenceVerdict:
    """Scan x_n^2 <= x_(n-1) x_(n+1) over the interior of the sequence."""
    return _check(seq, "log_convex", bits)


def check_log_concave(seq: MomentSequence, bits: int | None = None) -> SequenceVerdict:
    """Scan x_n^2 >= x_(n-1) x_(n+1) over the interior of the sequence."""
    return _check(seq, "log_concave", bits)


def check_theorem4(profile: MomentProfile, p: int, n_max: int) -> SequenceVerdict:
    """Exact log-convexity scan of b_n restricted to n >= p^2.

    Also reports (as a diagnostic) the smallest n from which log-convexity
    holds throughout the scanned range, which is typically far below p^2.
    """
    if not isinstance(p, int) or p < 2:
        raise DomainError(f"need integer p >= 2, got {p!r}")
    if n_max < p * p + 1:
        raise DomainError(f"need n_max >= p^2+1 = {p*p+1}, got {n_max}")
    seq = bn_partition_sequence(profile, p, range(1, n_max + 2))
    values = list(seq.values)
    slacks = _slacks_exact(values, 1)  # slack at n = 2 .. n_max
    window_lo = p * p
    window = slacks[window_lo - 2:]
    margin = min(window)
    first = None
    for i, s in enumerate(window):
        if s < 0:
            n = window_lo + i
            first = ViolationCertificate(n, tuple(values[n - 2:n + 1]))
            break
    onset = 2
    for i, s in enumerate(slacks):
        if s < 0:
            onset = i + 3  # violation at n = i+2, so convexity holds from i+3 on
    status = "holds_exact" if first is None else "violated"
    return SequenceVerdict(
        "log_convex", status, margin, first, (window_lo, n_max), None,
        seq.provenance, details={"convexity_onset": onset, "p": p})


def lemma7_value(p: int, m: int, x) -> Fraction:
    """Exact x^2 f''(x) for f(x) = log(x(x-1)...(x-m+1) / x^p).

    Equals (p-1) - x^2 * sum_{k=1}^{m-1} 1/(x-k)^2; positive on the scan
    domain.  x must avoid the poles, i.e. x > m-1.
    """
    if not isinstance(p, int) or p < 2:
        raise DomainError(f"need integer p >= 2, got {p!r}")
    if not 1 <= m <= p - 1:
        raise DomainError(f"need 1 <= m <= p-1, got m={m}")
    x = as_fraction(x)
    if x <= m - 1:
        raise DomainError(f"x={x} is at or below the pole region (need x > {m-1})")
    total = Fraction(p - 1)
    for k in range(1, m):
        total -= x**2 / (x - k) ** 2
    return total


@dataclass(frozen=True)
class Lemma7Report:
    p: int
    m: int
    status: str
    min_value: Fraction
    min_at: Fraction
    u_log_convex: bool
    u_margin: Fraction | None
    grid: tuple[Fraction, Fraction, int]
    table: tuple[tuple[Fraction, Fraction], ...]

    @property
    def holds(self) -> bool:
        return self.status == "holds_exact"

    def to_json_dict(self) -> dict:
        return {
            "claim": "lemma7",
            "status": self.status,
            "p": self.p,
            "m": self.m,
            "min_value": str(self.min_value),
            "min_at": str(self.min_at),
            "u_log_convex": self.u_log_convex,
            "u_margin": str(self.u_margin) if self.u_margin is not None else None,
            "grid": [str(self.grid[0]), str(self.grid[1]), self.grid[2]],
            "margin_table": [[str(x), str(v)] for x, v in self.table],
        }


def default_lemma7_grid(p: int, x_max=None) -> list[Fraction]:
    """Integers plus half-integers in [p^2-1, 4p^2] (or a custom upper end)."""
    lo = Fraction(p * p - 1)
    hi = as_fraction(x_max) if x_max is not None else Fraction(4 * p * p)
    grid = []
    x = lo
    while x <= hi:
        grid.append(x)
        x += Fraction(1, 2)
    return grid


def check_lemma7(p: int, m: int, x_grid=None) -> Lemma7Report:
    """Exact positivity scan of lemma7_value over a grid, plus the discrete
    log-convexity of u_n = n!/(n^p (n-m)!) for integers n >= p^2."""
    grid = [as_fraction(x) for x in (x_grid if x_grid is not None else default_lemma7_grid(p))]
    if not grid:
        raise DomainError("empty grid")
    table = tuple((x, lemma7_value(p, m, x)) for x in grid)
    min_at, min_value = min(table, key=lambda pair: pair[1])
    positive = min_value > 0

    n_lo, n_hi = p * p, 4 * p * p
    u = {n: Fraction(falling_factorial(n, m), n**p) for n in range(n_lo - 1, n_hi + 2)}
    u_slacks = [u[n - 1] * u[n + 1] - u[n] ** 2 for n in range(n_lo, n_hi + 1)]
    u_margin = min(u_slacks) if u_slacks else None
    u_ok = u_margin is None or u_margin >= 0

    status = "holds_exact" if (positive and u_ok) else "violated"
    return Lemma7Report(p, m, status, min_value, min_at, u_ok, u_margin,
                        (grid[0], grid[-1], len(grid)), table)


@dataclass(frozen=True)
class Remark5Report:
    p: int
    coefficients: tuple[tuple[str, Fraction], ...]
    nonnegative: bool
    reconstruction_exact: bool
    checked_n: tuple[int, int]

    @property
    def status(self) -> str:
        return "holds_exact" if (self.nonnegative and self.reconstruction_exact) else "violated"

    @property
    def holds(self) -> bool:
        return self.status == "holds_exact"

    def to_json_dict(self) -> dict:
        return {
            "claim": "remark5",
            "status": self.status,
            "p": self.p,
            "coefficients": [[label, str(c)] for label, c in self.coefficients],
            "nonnegative": self.nonnegative,
            "reconstruction_exact": self.reconstruction_exact,
            "checked_n": list(self.checked_n),
        }


def verify_remark5_decomposition(profile: MomentProfile, p: int,
                                 n_check: int = 24) -> Remark5Report:
    """Split b_n into elementary log-convex pieces and re-assemble it exactly.

    p=2:  b_n = (E X)^2 + Var(X) / n.
    p=3:  b_n = (E X)^3 + (E X^3 + (E X)^3 - 2 E X^2 E X) / n^2
              + (E X) Var(X) (3/n - 1/n^2).
    The middle p=3 coefficient is nonnegative by Cauchy-Schwarz.
    """
    if p not in (2, 3):
        raise DomainError(f"decomposition is implemented for p in {{2, 3}}, got {p}")
    if profile.p_max < p:
        raise DomainError(f"profile covers order {profile.p_max}, need {p}")
    mu1, mu2 = profile.mu(1), profile.mu(2)
    var = mu2 - mu1**2
    if p == 2:
        coeffs = (("1", mu1**2), ("1/n", var))

        def reconstruct(n):
            return mu1**2 + var / n
    else:
        mu3 = profile.mu(3)
        cs_factor = mu3 + mu1**3 - 2 * mu2 * mu1
        coeffs = (("1", mu1**3), ("1/n^2", cs_factor), ("3/n - 1/n^2", mu1 * var))

        def reconstruct(n):
            return (mu1**3 + cs_factor * Fraction(1, n**2)
                    + mu1 * var * (Fraction(3, n) - Fraction(1, n**2)))

    nonnegative = all(c >= 0 for _, c in coeffs)
    exact = all(reconstruct(n) == bn_partition_formula(profile, p, n)
                for n in range(1, n_check + 1))
    return Remark5Report(p, coeffs, nonnegative, exact, (1, n_check))


@dataclass(frozen=True)
class Remark6Report:
    branch: str                 # "convex" (p < 0) | "concave" (0 < p < 1/2)
    p: Fraction
    n: int
    factor: float               # ((n^2-1)/n^2)^p
    paper_slack: float          # slack of the factor-free bound
    boland_slack: float         # slack of the factored bound
    paper_holds: bool
    boland_holds: bool
    factor_free_is_tighter: bool
    status: str
    precision_bits: int

    @property
    def holds(self) -> bool:
        return self.status.startswith("holds")

    def to_json_dict(self) -> dict:
        return {
            "claim": "remark6",
            "status": self.status,
            "branch": self.branch,
            "p": str(self.p),
            "n": self.n,
            "factor": self.factor,
            "paper_slack": self.paper_slack,
            "boland_slack": self.boland_slack,
            "paper_holds": self.paper_holds,
            "boland_holds": self.boland_holds,
            "factor_free_is_tighter": self.factor_free_is_tighter,
            "precision_bits": self.precision_bits,
        }


def check_remark6_factor(dist: Distribution, p, n: int, bits: int | None = None,
                         seq: MomentSequence | None = None) -> Remark6Report:
    """Compare the factor-free three-term bound against the factored one.

    For 0 < p < 1/2 both are log-concavity style bounds
    (x_n^2 >= c * x_(n-1) x_(n+1) with c = ((n^2-1)/n^2)^p < 1); for p < 0
    both are log-convexity style (c > 1).  The factor-free bound implies the
    factored one, which this check confirms numerically.
    """
    p = as_fraction(p) if not isinstance(p, float) else Fraction(p)
    if p < 0:
        branch = "convex"
    elif 0 < p < Fraction(1, 2):
        branch = "concave"
    else:
        raise DomainError(f"the comparison needs p < 0 or 0 < p < 1/2, got p={p} "
                          "(the product function is neither convex nor concave beyond 1/2)")
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    if seq is None:
        exponent = int(p) if p.denominator == 1 else p
        seq = an_sequence(dist, PowerFunction(exponent), range(n - 1, n + 2), bits=bits)
    conv_bits = max(bits or default_precision(), MIN_CHECK_BITS)
    with working_precision(conv_bits):
        (cl, el), (cc, ec), (cr, er) = (_center_bound(seq.value_at(k), conv_bits)
                                        for k in (n - 1, n, n + 1))
        factor = (to_mpf(Fraction(n * n - 1, n * n))) ** to_mpf(p)
        prod, sq = cl * cr, cc * cc
        bound = cl * er + cr * el + el * er + 2 * cc * ec + ec * ec
        if branch == "convex":
            paper_slack = prod - sq
            boland_slack = factor * prod - sq
        else:
            paper_slack = sq - prod
            boland_slack = sq - factor * prod
        paper_holds = paper_slack - bound >= 0
        boland_holds = boland_slack - (1 + factor) * bound >= 0
        tighter = paper_slack <= boland_slack
        if paper_holds and boland_holds and tighter:
            status = "holds_exact" if seq.is_exact else "holds_within_tolerance"
        elif paper_slack < 0 and -paper_slack > VIOLATION_SAFETY_FACTOR * bound:
            status = "violated"
        else:
            status = "inconclusive"
        return Remark6Report(branch, p, n, float(factor), float(paper_slack),
                             float(boland_slack), bool(paper_holds), bool(boland_holds),
                             bool(tighter), status, conv_bits)
