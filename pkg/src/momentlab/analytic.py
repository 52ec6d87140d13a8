"""Evaluation of E f((X_1+...+X_n)/n) through half-line integral
representations of power functions, plus the Laplace-power diagnostics
u_n(t) = F(t/n)^n and G(alpha, t) = 1 - F(t/alpha)^alpha.

The integral representations used (with F the Laplace transform of X_1):

    x^p  (p < 0):      E (S_n/n)^p = (1/Gamma(-p)) Int_0^inf t^(-p-1) F(t/n)^n dt
    x^p  (0 < p < 1):  E (S_n/n)^p = (p/Gamma(1-p)) Int_0^inf (1 - F(t/n)^n) t^(-p-1) dt

Both integrands are evaluated at >= 200 bits so the cancellation in
1 - F^n stays harmless for large n.  Quadrature is adaptive tanh-sinh on
panels split at the integrand's peak; beyond the tail cut the remainder is
not integrated but bounded analytically, and the bound is folded into the
reported error.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from mpmath import mp, mpf

from .distributions import (
    ContinuousFamily,
    DiscreteDistribution,
    Distribution,
    EstimateWithError,
    laplace_mp,
    one_minus_laplace_mp,
)
from .errors import ConvergenceError, DomainError
from .precision import to_mpf, working_precision
from .sequences import (
    ExpDecayFunction,
    FunctionDescriptor,
    HingeFunction,
    MomentSequence,
    PowerFunction,
)

# absolute tail-bound target, before the Gamma prefactor
_TAIL_EPS = Fraction(1, 10**20)
_MAX_DOUBLINGS = 400
_PANEL_RATIO = 8
# mpmath's quadrature error is an estimate, not a certificate; widen it
_QUAD_ERR_SAFETY = 10
_MAX_QUAD_DEGREE = 6


def _one_minus_laplace_power(dist: Distribution, t, exponent) -> mpf:
    """1 - F(t)^exponent with full relative precision near t = 0."""
    d1 = one_minus_laplace_mp(dist, t)
    if d1 == 0:
        return mpf(0)
    if d1 >= 1:
        return mpf(1)
    return -mp.expm1(exponent * mp.log1p(-d1))


def _laplace_power(dist: Distribution, t, exponent) -> mpf:
    """F(t)^exponent through the stable log1p route."""
    d1 = one_minus_laplace_mp(dist, t)
    if d1 >= 1:
        return mpf(0)
    return mp.e ** (exponent * mp.log1p(-d1))


def _as_exponent(p) -> Fraction:
    """Exponent as an exact rational; floats map to their exact binary value."""
    if isinstance(p, float):
        return Fraction(p)
    if isinstance(p, (int, Fraction)):
        return Fraction(p)
    raise DomainError(f"exponent must be a number, got {type(p).__name__}")


def u_n(dist: Distribution, t, n: int, bits: int | None = None) -> mpf:
    """F(t/n)^n at working precision; the n-th Laplace power."""
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    if not t > 0:
        raise DomainError(f"need t > 0, got {t}")
    with working_precision(bits):
        return _laplace_power(dist, to_mpf(t) / n, n)


def g_alpha_t(dist: Distribution, alpha, t, bits: int | None = None) -> mpf:
    """1 - F(t/alpha)^alpha, a value in [0, 1)."""
    if not alpha > 0:
        raise DomainError(f"need alpha > 0, got {alpha}")
    if not t > 0:
        raise DomainError(f"need t > 0, got {t}")
    with working_precision(bits):
        a = to_mpf(alpha)
        return _one_minus_laplace_power(dist, to_mpf(t) / a, a)


def _mean_scale(dist: Distribution) -> float:
    if isinstance(dist, DiscreteDistribution):
        return float(dist.mean())
    if dist.name == "exponential":
        return 1.0 / float(dist.param("rate"))
    if dist.name == "uniform":
        return (float(dist.param("a")) + float(dist.param("b"))) / 2.0
    raise DomainError(f"unknown family {dist.name!r}")


def _essential_infimum(dist: Distribution) -> Fraction:
    if isinstance(dist, DiscreteDistribution):
        return dist.min_value
    if dist.name == "exponential":
        return Fraction(0)
    if dist.name == "uniform":
        return dist.param("a")
    raise DomainError(f"unknown family {dist.name!r}")


def _geometric_panels(lo: mpf, hi: mpf) -> list:
    """Panel endpoints lo, lo*R, lo*R^2, ..., hi."""
    points = [lo]
    cur = lo
    while cur * _PANEL_RATIO < hi:
        cur = cur * _PANEL_RATIO
        points.append(cur)
    points.append(hi)
    return points


def _negative_tail_bound(dist, Fn_at_T, p: mpf, n: int, T: mpf) -> mpf:
    """Upper bound for Int_T^inf t^(-p-1) F(t/n)^n dt.

    Uses the exponential envelope F(t/n)^n <= F(T/n)^n e^{-(t-T) v} when the
    essential infimum v is positive, else the family's algebraic majorant
    F(t) <= C t^(-r).
    """
    a = -p - 1
    v = _essential_infimum(dist)
    if v > 0:
        vv = to_mpf(v)
        return Fn_at_T * mp.e ** (vv * T) * vv ** (-a - 1) * mp.gammainc(a + 1, vv * T)
    C, r = dist.laplace_tail_majorant()
    if r * n <= -p:
        raise ConvergenceError(
            f"tail of E[(S_n/n)^p] does not converge for {dist} at n={n}, p={p}")
    Cn = to_mpf(C) * mpf(n) ** r
    exponent = a + 1 - r * n  # < 0 by the check above
    return Cn**n * T**exponent / (-exponent)


def _pick_tail_cut(bound_at, T0: mpf) -> tuple[mpf, mpf]:
    """Double the cut T until the monitored tail bound drops below target."""
    eps = to_mpf(_TAIL_EPS)
    T = T0
    for _ in range(_MAX_DOUBLINGS):
        B = bound_at(T)
        if B < eps:
            return T, B
        T = T * 2
    raise ConvergenceError("tail bound failed to converge; integral diverges or decays too slowly")


def an_quadrature_negative_p(dist: Distribution, p, n: int,
                             bits: int | None = None) -> EstimateWithError:
    """E (S_n/n)^p for p < 0 by adaptive quadrature of t^(-p-1) F(t/n)^n."""
    p = _as_exponent(p)
    if not -8 <= p < 0:
        raise DomainError(f"need -8 <= p < 0, got {p}")
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    if isinstance(dist, DiscreteDistribution) and not dist.is_positive:
        raise DomainError("negative exponents need a strictly positive support (atom at 0 present)")
    with working_precision(bits, guard=40) as recorded_bits:
        pm = to_mpf(p)
        a = -pm - 1

        def integrand(t):
            return t**a * laplace_mp(dist, t / n) ** n

        # coarse scan for the peak location
        scale = 1.0 / max(_mean_scale(dist), 1e-12)
        grid = [to_mpf(scale) * mpf(2) ** k for k in range(-12, 31)]
        t_peak = max(grid, key=integrand)

        def bound_at(T):
            return _negative_tail_bound(dist, laplace_mp(dist, T / n) ** n, pm, n, T)

        T, tail = _pick_tail_cut(bound_at, 8 * t_peak)
        points = [mpf(0), t_peak] + _geometric_panels(8 * t_peak, T)[: -1] + [T]
        integral, quad_err = mp.quad(integrand, points, error=True,
                                     method="tanh-sinh", maxdegree=_MAX_QUAD_DEGREE)
        pre_gamma_err = _QUAD_ERR_SAFETY * quad_err + tail
        if pre_gamma_err > mpf("1e-10") * (1 + abs(integral)):
            raise ConvergenceError(f"quadrature failed its accuracy target (err {mp.nstr(pre_gamma_err, 5)})")
        prefactor = 1 / mp.gamma(-pm)
        value = integral * prefactor
        err = pre_gamma_err * prefactor + mp.ldexp(1 + abs(value), -recorded_bits)
    return EstimateWithError(value, float(err), "quadrature")


def an_quadrature_fractional_p(dist: Distribution, p, n: int,
                               bits: int | None = None) -> EstimateWithError:
    """E (S_n/n)^p for 0 < p < 1 via the (p/Gamma(1-p)) (1 - F^n) t^(-p-1) integral."""
    p = _as_exponent(p)
    if not 0 < p < 1:
        raise DomainError(f"need 0 < p < 1, got {p}")
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    if isinstance(dist, DiscreteDistribution) and dist.min_value == 0 and len(dist.atoms) == 1:
        return EstimateWithError(mpf(0), 0.0, "quadrature")  # point mass at 0
    with working_precision(bits, guard=40) as recorded_bits:
        pm = to_mpf(p)
        if isinstance(dist, DiscreteDistribution):
            pi0 = to_mpf(dist.prob_at_zero())
        else:
            pi0 = mpf(0)
        pi0_n = pi0**n

        def one_minus_Fn(t):
            return _one_minus_laplace_power(dist, t / n, n)

        def integrand(t):
            return one_minus_Fn(t) * t ** (-pm - 1)

        # the t^(-p-1) singularity at 0 is integrable because 1 - F^n = O(t);
        # substituting t = u^(1/(1-p)) makes the transformed integrand bounded
        c = 1 / (1 - pm)

        def integrand_sub(u):
            return one_minus_Fn(u**c) * u ** (-c) * c

        def bound_at(T):
            return (laplace_mp(dist, T / n) ** n - pi0_n) * T ** (-pm) / pm

        T, tail = _pick_tail_cut(bound_at, mpf(8))
        sub_val, sub_err = mp.quad(integrand_sub, [mpf(0), mpf(1)], error=True,
                                   method="tanh-sinh", maxdegree=_MAX_QUAD_DEGREE)
        mid_val, mid_err = mp.quad(integrand, _geometric_panels(mpf(1), T), error=True,
                                   method="tanh-sinh", maxdegree=_MAX_QUAD_DEGREE)
        analytic_tail = (1 - pi0_n) * T ** (-pm) / pm
        integral = sub_val + mid_val + analytic_tail
        pre_gamma_err = _QUAD_ERR_SAFETY * (sub_err + mid_err) + tail
        if pre_gamma_err > mpf("1e-10") * (1 + abs(integral)):
            raise ConvergenceError(f"quadrature failed its accuracy target (err {mp.nstr(pre_gamma_err, 5)})")
        prefactor = pm / mp.gamma(1 - pm)
        value = integral * prefactor
        err = pre_gamma_err * prefactor + mp.ldexp(1 + abs(value), -recorded_bits)
    return EstimateWithError(value, float(err), "quadrature")


def _apply_f(f: FunctionDescriptor, means: np.ndarray) -> np.ndarray:
    if isinstance(f, PowerFunction):
        return means ** float(f.exponent)
    if isinstance(f, HingeFunction):
        return np.maximum(means - float(f.threshold), 0.0)
    if isinstance(f, ExpDecayFunction):
        return np.exp(-float(f.rate) * means)
    raise DomainError(f"unknown function descriptor {f!r}")


def an_monte_carlo(dist: Distribution, f: FunctionDescriptor, n_range,
                   samples: int, seed: int) -> MomentSequence:
    """Monte Carlo sequence with a common sample pool across all n.

    One pool of i.i.d. draws builds every prefix mean, so consecutive-ratio
    comparisons share their noise; standard errors are reported per n.
    """
    if samples < 1000:
        raise DomainError(f"need samples >= 1000, got {samples}")
    n_lo, n_hi = _range_bounds(n_range)
    if isinstance(f, PowerFunction) and f.exponent < 0:
        if isinstance(dist, DiscreteDistribution) and not dist.is_positive:
            raise DomainError("negative exponents need a strictly positive support")
    rng = np.random.default_rng(seed)
    width = n_hi - n_lo + 1
    total = np.zeros(width)
    total_sq = np.zeros(width)
    divisors = np.arange(n_lo, n_hi + 1, dtype=float)
    from .distributions import _draw  # shares the sampler with sample()

    done = 0
    chunk_rows = max(1, min(65536, samples))
    while done < samples:
        rows = min(chunk_rows, samples - done)
        draws = _draw(dist, rng, rows * n_hi).reshape(rows, n_hi)
        prefix_means = np.cumsum(draws, axis=1)[:, n_lo - 1:] / divisors
        y = _apply_f(f, prefix_means)
        total += y.sum(axis=0)
        total_sq += (y * y).sum(axis=0)
        done += rows
    mean = total / samples
    # unbiased variance of the estimator of the mean
    var = np.maximum(total_sq / samples - mean**2, 0.0) * samples / max(samples - 1, 1)
    stderr = np.sqrt(var / samples)
    values = tuple(EstimateWithError(float(m), float(s), "monte_carlo")
                   for m, s in zip(mean, stderr))
    return MomentSequence(f, n_lo, values, ("monte_carlo",) * width, None)


def _range_bounds(n_range) -> tuple[int, int]:
    if isinstance(n_range, range):
        if n_range.step != 1 or len(n_range) == 0:
            raise DomainError(f"n range must be contiguous and nonempty, got {n_range}")
        return n_range.start, n_range.stop - 1
    lo, hi = n_range
    if lo < 1 or hi < lo:
        raise DomainError(f"bad n range ({lo}, {hi})")
    return int(lo), int(hi)
