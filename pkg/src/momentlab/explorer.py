"""Search and falsification harness: stress scans of the integer-order
log-convexity conjecture, the pointwise subset-average inequality, the
hinge-function counterexample hunt, and grid scans of the G diagnostics.

Every reported violation re-verifies through an independent code path
before it is written into a report.  Reports are byte-identical for
identical seeds and grids.
"""
from __future__ import annotations

import itertools
import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import mpf

from .analytic import g_alpha_t
from .checkers import ViolationCertificate
from .distributions import (
    DiscreteDistribution,
    Distribution,
    as_fraction,
    bernoulli,
    moments_of,
)
from .errors import DomainError
from .moment_engine import an_convolution_oracle, bn_convolution_oracle, bn_partition_sequence
from .precision import default_precision, to_mpf, working_precision
from .sequences import HingeFunction, PowerFunction


@dataclass(frozen=True)
class SearchReport:
    target: str
    space: dict
    trials: int
    violations: tuple[dict, ...]
    nearest_miss: dict | None
    seed: int | None = None
    precision_bits: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def found_violation(self) -> bool:
        return len(self.violations) > 0

    def to_json_dict(self) -> dict:
        return {
            "target": self.target,
            "space": self.space,
            "trials": self.trials,
            "violations": list(self.violations),
            "nearest_miss": self.nearest_miss,
            "seed": self.seed,
            "precision_bits": self.precision_bits,
            **({"extra": self.extra} if self.extra else {}),
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def random_rational_distributions(seed: int, count: int,
                                  atom_counts=(2, 3, 4)) -> list[DiscreteDistribution]:
    """Reproducible pool of small exact laws: values j/16 with j in 1..64,
    probabilities from small integer weights."""
    rng = random.Random(seed)
    pool = []
    for _ in range(count):
        k = rng.choice(atom_counts)
        values = rng.sample(range(1, 65), k)
        weights = [rng.randint(1, 16) for _ in range(k)]
        total = sum(weights)
        pool.append(DiscreteDistribution(tuple(
            (Fraction(j, 16), Fraction(w, total)) for j, w in zip(values, weights))))
    return pool


def parallel_map(fn, items, threads: int = 1) -> list:
    """Order-preserving map, optionally over a process pool."""
    if threads <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=8))


# ---------------------------------------------------------------------------
# integer-order log-convexity stress search

def _conjecture4_cell(args) -> dict:
    dist, p, n_max = args
    profile = moments_of(dist, p)
    seq = bn_partition_sequence(profile, p, range(1, n_max + 2))
    values = list(seq.values)
    violations = []
    minima = {"theorem": None, "conjectured": None}
    for n in range(2, n_max + 1):
        b_prev, b, b_next = values[n - 2], values[n - 1], values[n]
        slack = (b_prev * b_next - b * b) / (b * b)
        region = "theorem" if n >= p * p else "conjectured"
        if minima[region] is None or slack < minima[region][0]:
            minima[region] = (slack, n)
        if slack < 0:
            recheck = [bn_convolution_oracle(dist, p, k) for k in (n - 1, n, n + 1)]
            violations.append({
                "distribution": dist.spec_dict(),
                "p": p,
                "n": n,
                "certificate": ViolationCertificate(n, (b_prev, b, b_next)).to_json_dict(),
                "recheck_confirms": recheck == [b_prev, b, b_next],
            })
    return {"violations": violations, "minima": minima}


def search_conjecture4(p_list, *, budget: int = 100, n_max: int = 20, seed: int = 0,
                       pool: list[DiscreteDistribution] | None = None,
                       threads: int = 1) -> SearchReport:
    """Scan b_n^2 <= b_(n-1) b_(n+1) for integer p > 1 over a distribution
    pool, including the regime n < p^2 that no theorem covers.

    Violations (none are expected) re-verify by exact convolution.  The
    nearest-miss slack is normalized, (b_(n-1) b_(n+1) - b_n^2) / b_n^2,
    and reported separately for the proven and the conjectured regime.
    """
    p_list = [int(p) for p in p_list]
    if any(p < 2 for p in p_list):
        raise DomainError(f"conjecture search needs integer p > 1, got {p_list}")
    if pool is None:
        pool = random_rational_distributions(seed, budget)
    cells = [(dist, p, n_max) for dist in pool for p in p_list]
    results = parallel_map(_conjecture4_cell, cells, threads)

    violations = []
    minima = {"theorem": None, "conjectured": None}
    for (dist, p, _), res in zip(cells, results):
        violations.extend(res["violations"])
        for region, entry in res["minima"].items():
            if entry is None:
                continue
            if minima[region] is None or entry[0] < minima[region][0]:
                minima[region] = (entry[0], entry[1], dist, p)

    def miss_dict(entry):
        if entry is None:
            return None
        slack, n, dist, p = entry
        return {"slack_normalized": str(slack), "n": n, "p": p,
                "distribution": dist.spec_dict()}

    overall = min((m for m in minima.values() if m is not None),
                  key=lambda e: e[0], default=None)
    return SearchReport(
        target="conjecture4",
        space={"p_list": p_list, "n_range": [2, n_max], "budget": len(pool),
               "pool": "random_rational(values j/16, j in 1..64; 2-4 atoms)"},
        trials=len(cells),
        violations=tuple(violations),
        nearest_miss=miss_dict(overall),
        seed=seed,
        extra={"nearest_miss_by_region": {k: miss_dict(v) for k, v in minima.items()}},
    )


# ---------------------------------------------------------------------------
# pointwise subset-average inequality

def _subset_products(x: list, n: int, size: int) -> list:
    total = sum(x)
    out = []
    for idx in itertools.combinations(range(2 * n), size):
        s = sum(x[i] for i in idx)
        out.append(s * (total - s))
    return out


def check_pointwise_remark8(x, p, n: int | None = None, bits: int | None = None):
    """Signed slack of the two subset averages of phi(x_I x_Ic / ...) with
    phi(x) = x^p; nonnegative slack means the inequality holds.

    Exact Fraction for integer p; a high-precision value otherwise.
    """
    xs = [as_fraction(v) for v in x]
    if any(v < 0 for v in xs):
        raise DomainError("inputs must be nonnegative")
    if n is None:
        n = len(xs) // 2
    if len(xs) != 2 * n or n < 1:
        raise DomainError(f"need 2n = {2*n} inputs, got {len(xs)}")
    p = Fraction(p) if isinstance(p, float) else as_fraction(p)
    if p < 1:
        raise DomainError(f"phi(x) = x^p needs p >= 1 to be convex, got {p}")
    lhs_args = _subset_products(xs, n, n)
    rhs_args = _subset_products(xs, n, n + 1)
    c_lhs, c_rhs = math.comb(2 * n, n), math.comb(2 * n, n + 1)
    if p.denominator == 1:
        e = int(p)
        lhs = sum((a / Fraction(n * n)) ** e for a in lhs_args) / c_lhs
        rhs = sum((a / Fraction(n * n - 1)) ** e for a in rhs_args) / c_rhs
        return rhs - lhs
    with working_precision(bits):
        pm = to_mpf(p)
        lhs = sum(to_mpf(a / Fraction(n * n)) ** pm for a in lhs_args if a) / c_lhs
        rhs = sum(to_mpf(a / Fraction(n * n - 1)) ** pm for a in rhs_args if a) / c_rhs
        return rhs - lhs


def remark8_random_scan(trials: int, p_list, *, seed: int = 0, n: int = 2,
                        bits: int | None = None, hp_tolerance: float = 1e-20,
                        value_ceiling: int = 64) -> SearchReport:
    """Randomized scan of the subset-average inequality over exact rational
    tuples with entries j/16, j in 0..value_ceiling.

    Integer exponents use a pure-integer reformulation (the slack sign is
    invariant under scaling all inputs); any violation re-verifies through
    check_pointwise_remark8 on the rational inputs.  Non-integer exponents
    are scanned at high precision against -hp_tolerance.
    """
    rng = random.Random(seed)
    p_exact, p_hp = [], []
    for p in p_list:
        fr = Fraction(p) if isinstance(p, float) else as_fraction(p)
        if fr < 1:
            raise DomainError(f"phi(x) = x^p needs p >= 1, got {fr}")
        (p_exact if fr.denominator == 1 else p_hp).append(int(fr) if fr.denominator == 1 else fr)
    size_n = list(itertools.combinations(range(2 * n), n))
    size_n1 = list(itertools.combinations(range(2 * n), n + 1))
    c_lhs, c_rhs = math.comb(2 * n, n), math.comb(2 * n, n + 1)
    nn, nn1 = n * n, n * n - 1

    violations = []
    nearest = None  # (normalized slack Fraction, x ints, p)
    hp_min = {str(p): None for p in p_hp}
    conv_bits = bits or default_precision()
    with working_precision(conv_bits):
        for _ in range(trials):
            ints = [rng.randint(0, value_ceiling) for _ in range(2 * n)]
            total = sum(ints)
            prods_lhs = [(s := sum(ints[i] for i in idx)) * (total - s) for idx in size_n]
            prods_rhs = [(s := sum(ints[i] for i in idx)) * (total - s) for idx in size_n1]
            for e in p_exact:
                a_sum = sum(v**e for v in prods_rhs)
                b_sum = sum(v**e for v in prods_lhs)
                d = a_sum * c_lhs * nn**e - b_sum * c_rhs * nn1**e
                if b_sum > 0:
                    norm = Fraction(d, b_sum * c_rhs * nn1**e)
                    if nearest is None or norm < nearest[0]:
                        nearest = (norm, list(ints), e)
                if d < 0:
                    xs = [Fraction(j, 16) for j in ints]
                    exact_slack = check_pointwise_remark8(xs, e, n)
                    violations.append({
                        "x": [str(v) for v in xs], "p": e, "n": n,
                        "slack": str(exact_slack),
                        "recheck_confirms": exact_slack < 0,
                    })
            for p in p_hp:
                xs = [Fraction(j, 16) for j in ints]
                slack = check_pointwise_remark8(xs, p, n, bits=conv_bits)
                key = str(p)
                if hp_min[key] is None or slack < hp_min[key][0]:
                    hp_min[key] = (slack, list(ints))
                if slack < -mpf(hp_tolerance):
                    recheck = check_pointwise_remark8(xs, p, n, bits=2 * conv_bits)
                    violations.append({
                        "x": [str(v) for v in xs], "p": str(p), "n": n,
                        "slack": float(slack),
                        "recheck_confirms": bool(recheck < -mpf(hp_tolerance) / 2),
                    })
    return SearchReport(
        target="remark8",
        space={"n": n, "p_list": [str(p) for p in p_list], "trials": trials,
               "values": f"j/16, j in 0..{value_ceiling}"},
        trials=trials,
        violations=tuple(violations),
        nearest_miss=(None if nearest is None else
                      {"slack_normalized": str(nearest[0]),
                       "x": [f"{j}/16" for j in nearest[1]], "p": nearest[2]}),
        seed=seed,
        precision_bits=conv_bits if p_hp else None,
        extra={"hp_min_slack": {k: (float(v[0]) if v else None) for k, v in hp_min.items()}},
    )


# ---------------------------------------------------------------------------
# hinge-function counterexample search

def hinge_bernoulli_exact(theta, a, n: int) -> Fraction:
    """E max(S_n/n - a, 0) for Bernoulli inputs, by the binomial sum."""
    theta, a = as_fraction(theta), as_fraction(a)
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0,1), got {theta}")
    total = Fraction(0)
    for k in range(1, n + 1):
        gap = Fraction(k, n) - a
        if gap > 0:
            total += Fraction(math.comb(n, k)) * theta**k * (1 - theta) ** (n - k) * gap
    return total


def find_final_remark_counterexample(a_grid=None, theta_grid=None,
                                     n_max: int = 6) -> SearchReport:
    """Hunt log-convexity violations of a_n = E max(S_n/n - a, 0) with
    Bernoulli inputs over (a, theta) grids; violations are expected.

    Flat-zero sequences (a at or above the support maximum) are skipped.
    The scan order (a, then theta, then n, all ascending) is deterministic,
    so the first violation is a stable regression anchor.
    """
    if a_grid is None:
        a_grid = [Fraction(k, 10) for k in range(1, 10)]
    if theta_grid is None:
        theta_grid = [Fraction(k, 10) for k in range(1, 10)]
    a_grid = sorted(as_fraction(a) for a in a_grid)
    theta_grid = sorted(as_fraction(t) for t in theta_grid)
    if not a_grid or not theta_grid:
        raise DomainError("grids must be nonempty")
    violations = []
    nearest = None
    for a in a_grid:
        for theta in theta_grid:
            seq = [hinge_bernoulli_exact(theta, a, n) for n in range(1, n_max + 1)]
            if all(v == 0 for v in seq):
                continue
            for n in range(2, n_max):
                prev, cur, nxt = seq[n - 2], seq[n - 1], seq[n]
                if cur == 0:
                    continue
                slack = (prev * nxt - cur * cur) / (cur * cur)
                if nearest is None or slack < nearest[0]:
                    nearest = (slack, a, theta, n)
                if slack < 0:
                    dist = bernoulli(theta)
                    recheck = [an_convolution_oracle(dist, HingeFunction(a), k)
                               for k in (n - 1, n, n + 1)]
                    violations.append({
                        "a": str(a), "theta": str(theta), "n": n,
                        "triple": [str(v) for v in (prev, cur, nxt)],
                        "slack_normalized": str(slack),
                        "recheck_confirms": recheck == [prev, cur, nxt],
                    })
    return SearchReport(
        target="final_remark",
        space={"a_grid": [str(a) for a in a_grid],
               "theta_grid": [str(t) for t in theta_grid], "n_max": n_max},
        trials=len(a_grid) * len(theta_grid),
        violations=tuple(violations),
        nearest_miss=(None if nearest is None else
                      {"slack_normalized": str(nearest[0]), "a": str(nearest[1]),
                       "theta": str(nearest[2]), "n": nearest[3]}),
    )


# ---------------------------------------------------------------------------
# G(alpha, t) grid diagnostics

def scan_g_properties(pool, alpha_grid=None, t_grid=None, *, bits: int | None = None,
                      segments: int = 40, seed: int = 0,
                      tolerance: float = 1e-30) -> SearchReport:
    """Check that G(alpha, t) = 1 - F(t/alpha)^alpha is nondecreasing in
    alpha and midpoint-concave, on a grid and along sampled 2-D segments."""
    if alpha_grid is None:
        alpha_grid = [Fraction(k) for k in range(1, 21)]
    if t_grid is None:
        t_grid = [Fraction(k) for k in range(1, 21)]
    alpha_grid = sorted(as_fraction(a) for a in alpha_grid)
    t_grid = sorted(as_fraction(t) for t in t_grid)
    if any(a <= 0 for a in alpha_grid) or any(t <= 0 for t in t_grid):
        raise DomainError("grids must be strictly positive")
    if isinstance(pool, (DiscreteDistribution,)) or not isinstance(pool, (list, tuple)):
        pool = [pool]
    conv_bits = bits or default_precision()
    tol = mpf(tolerance)
    rng = random.Random(seed)
    violations = []
    mono_min = None
    conc_min = None
    evaluations = 0
    with working_precision(conv_bits):
        for dist in pool:
            cache: dict = {}

            def G(alpha, t):
                key = (alpha, t)
                if key not in cache:
                    cache[key] = g_alpha_t(dist, alpha, t, conv_bits)
                return cache[key]

            for t in t_grid:
                for a1, a2 in zip(alpha_grid, alpha_grid[1:]):
                    margin = G(a2, t) - G(a1, t)
                    if mono_min is None or margin < mono_min[0]:
                        mono_min = (margin, str(dist), str(a1), str(t))
                    if margin < -tol:
                        violations.append({"property": "monotone_alpha", "distribution": str(dist),
                                           "alpha": str(a1), "t": str(t), "margin": float(margin)})
                for a1, a2, a3 in zip(alpha_grid, alpha_grid[1:], alpha_grid[2:]):
                    if a2 - a1 != a3 - a2:
                        continue
                    margin = G(a2, t) - (G(a1, t) + G(a3, t)) / 2
                    if conc_min is None or margin < conc_min[0]:
                        conc_min = (margin, str(dist), str(a2), str(t))
                    if margin < -tol:
                        violations.append({"property": "concave_alpha", "distribution": str(dist),
                                           "alpha": str(a2), "t": str(t), "margin": float(margin)})
            for _ in range(segments):
                a1, a2 = rng.choice(alpha_grid), rng.choice(alpha_grid)
                t1, t2 = rng.choice(t_grid), rng.choice(t_grid)
                if (a1, t1) == (a2, t2):
                    continue
                am, tm = (a1 + a2) / 2, (t1 + t2) / 2
                margin = g_alpha_t(dist, am, tm, conv_bits) - (G(a1, t1) + G(a2, t2)) / 2
                if conc_min is None or margin < conc_min[0]:
                    conc_min = (margin, str(dist), f"({a1},{t1})-({a2},{t2})", "segment")
                if margin < -tol:
                    violations.append({"property": "concave_segment", "distribution": str(dist),
                                       "segment": [[str(a1), str(t1)], [str(a2), str(t2)]],
                                       "margin": float(margin)})
            evaluations += len(cache)
    return SearchReport(
        target="g_properties",
        space={"alpha_grid": [str(a) for a in alpha_grid], "t_grid": [str(t) for t in t_grid],
               "segments": segments, "pool_size": len(pool)},
        trials=evaluations,
        violations=tuple(violations),
        nearest_miss=None if mono_min is None else {
            "monotone_margin": float(mono_min[0]),
            "concavity_margin": float(conc_min[0]) if conc_min else None,
        },
        seed=seed,
        precision_bits=conv_bits,
        extra={"tolerance": tolerance},
    )
