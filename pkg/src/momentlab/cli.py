"""Batch front door: compute sequences, run checker suites, launch searches.

Exit codes are a stable contract:
    0  claim holds / search found its expected outcome
    1  claim violated / search outcome unexpected
    2  configuration error (bad flags, malformed spec, failed precondition)
    3  numerical non-convergence
    4  inconclusive (error bounds straddle the decision boundary)
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .checkers import (
    check_lemma7,
    check_log_concave,
    check_log_convex,
    check_remark6_factor,
    check_theorem4,
    verify_remark5_decomposition,
)
from .distributions import (
    DiscreteDistribution,
    as_fraction,
    bernoulli,
    exponential,
    load_distribution,
    moments_of,
    parse_distribution_spec,
    point_mass,
    uniform,
)
from .errors import ConfigError, ConvergenceError, DomainError
from .explorer import (
    find_final_remark_counterexample,
    random_rational_distributions,
    remark8_random_scan,
    search_conjecture4,
)
from .moment_engine import an_sequence, METHODS
from .precision import default_precision, validate_precision
from .sequences import (
    ExpDecayFunction,
    HingeFunction,
    PowerFunction,
    to_csv_text,
    to_json_text,
)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_CONFIG = 2
EXIT_NONCONVERGENT = 3
EXIT_INCONCLUSIVE = 4

CLAIMS = ("logconvex", "logconcave", "theorem4", "lemma7", "remark5", "remark6")
TARGETS = ("conjecture4", "remark8", "final_remark")

_RANDOM_POOL = object()  # marker for --dist random


@dataclass
class RunConfig:
    """Validated run parameters shared by the three subcommands."""

    command: str
    distribution: object | None = None
    p: object = None                      # int or Fraction
    n_range: tuple[int, int] | None = None
    method: str = "auto"
    precision_bits: int | None = None
    seed: int = 0
    output_format: str | None = None
    output_path: str | None = None
    extras: dict = field(default_factory=dict)


def _parse_rational(text: str):
    """Exact rational from 'a/b', integer, or decimal text (no float step)."""
    value = as_fraction(text)
    return int(value) if value.denominator == 1 else value


def _parse_n_range(text: str) -> tuple[int, int]:
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        lo, hi = int(lo_s), int(hi_s)
    else:
        lo = hi = int(text)
    if lo < 1 or hi < lo:
        raise ConfigError(f"bad n range {text!r} (need 1 <= lo <= hi)")
    return lo, hi


def _parse_list(text: str) -> list:
    return [_parse_rational(part) for part in text.split(",") if part.strip()]


def _build_distribution(args) -> object | None:
    if args.dist is not None and args.family is not None:
        raise ConfigError("give either --dist or --family, not both")
    if args.dist is not None:
        spec = args.dist.strip()
        if spec == "random":
            return _RANDOM_POOL
        if spec.startswith("point:"):
            return point_mass(spec.split(":", 1)[1])
        if spec.startswith("{"):
            return parse_distribution_spec(json.loads(spec))
        return load_distribution(spec)
    if args.family is not None:
        name = args.family
        if name == "bernoulli":
            if args.theta is None:
                raise ConfigError("--family bernoulli needs --theta")
            return bernoulli(args.theta)
        if name == "point":
            if args.value is None:
                raise ConfigError("--family point needs --value")
            return point_mass(args.value)
        if name == "exponential":
            if args.rate is None:
                raise ConfigError("--family exponential needs --rate")
            return exponential(args.rate)
        if name == "uniform":
            if args.a is None or args.b is None:
                raise ConfigError("--family uniform needs --a and --b")
            return uniform(args.a, args.b)
        raise ConfigError(f"unknown family {name!r}")
    return None


def _build_function(args):
    spec = getattr(args, "f", None) or "power"
    if spec == "power":
        if args.p is None:
            raise ConfigError("f = x^p needs --p")
        return PowerFunction(_parse_rational(args.p))
    if spec.startswith("hinge:"):
        return HingeFunction(as_fraction(spec.split(":", 1)[1]))
    if spec.startswith("exp:"):
        return ExpDecayFunction(as_fraction(spec.split(":", 1)[1]))
    raise ConfigError(f"unknown function {spec!r} (use power, hinge:a or exp:s)")


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dist", help="point:VALUE, 'random', a JSON file path, or inline JSON")
    parser.add_argument("--family", choices=("bernoulli", "point", "exponential", "uniform"))
    parser.add_argument("--theta", help="Bernoulli parameter as 'a/b'")
    parser.add_argument("--value", help="point-mass value as 'a/b'")
    parser.add_argument("--rate", help="exponential rate as 'a/b'")
    parser.add_argument("--a", help="uniform lower endpoint as 'a/b'")
    parser.add_argument("--b", help="uniform upper endpoint as 'a/b'")
    parser.add_argument("--p", help="exponent as integer or 'a/b'")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--precision-bits", type=int, default=None)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--format", choices=("json", "csv"), default=None)
    parser.add_argument("--output", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momentlab",
        description="Moment sequences of i.i.d. averages: exact computation, "
                    "log-convexity/log-concavity verdicts, counterexample search.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_compute = sub.add_parser("compute", help="compute a moment sequence")
    _add_common(p_compute)
    p_compute.add_argument("--f", help="power (default), hinge:a, or exp:s")
    p_compute.add_argument("--n", default="1..10", help="n range like 1..10")
    p_compute.add_argument("--method", choices=METHODS, default="auto")
    p_compute.add_argument("--samples", type=int, default=10000)

    p_check = sub.add_parser("check", help="run a claim checker")
    p_check.add_argument("claim", choices=CLAIMS)
    _add_common(p_check)
    p_check.add_argument("--f", help="power (default), hinge:a, or exp:s")
    p_check.add_argument("--n", default=None, help="n range like 1..12 (or a single n)")
    p_check.add_argument("--n-max", type=int, default=None)
    p_check.add_argument("--m", type=int, default=None)
    p_check.add_argument("--x-max", default=None, help="upper end of the lemma7 grid")
    p_check.add_argument("--method", choices=METHODS, default="auto")
    p_check.add_argument("--samples", type=int, default=10000)
    p_check.add_argument("--trials", type=int, default=None,
                         help="pool size when --dist random")

    p_search = sub.add_parser("search", help="run a falsification search")
    p_search.add_argument("target", choices=TARGETS)
    _add_common(p_search)
    p_search.add_argument("--p-list", default=None, help="comma list like 2,3,7")
    p_search.add_argument("--n", default=None)
    p_search.add_argument("--n-max", type=int, default=None)
    p_search.add_argument("--budget", type=int, default=200)
    p_search.add_argument("--trials", type=int, default=None)
    p_search.add_argument("--a-grid", default=None, help="comma list of rationals")
    p_search.add_argument("--theta-grid", default=None, help="comma list of rationals")
    return parser


def cmd_compute(config: RunConfig) -> int:
    dist = config.distribution
    if dist is None or dist is _RANDOM_POOL:
        raise ConfigError("compute needs a concrete distribution (--dist or --family)")
    seq = an_sequence(dist, config.extras["f"], config.n_range, config.method,
                      bits=config.precision_bits, samples=config.extras["samples"],
                      seed=config.seed)
    fmt = config.output_format or "csv"
    _emit(to_csv_text(seq) if fmt == "csv" else to_json_text(seq), config.output_path)
    return EXIT_OK


def _status_exit(status: str) -> int:
    if status in ("holds_exact", "holds_within_tolerance"):
        return EXIT_OK
    if status == "violated":
        return EXIT_VIOLATED
    return EXIT_INCONCLUSIVE


def _pool_or_single(config: RunConfig, default_trials: int):
    dist = config.distribution
    if dist is _RANDOM_POOL:
        trials = config.extras.get("trials") or default_trials
        return random_rational_distributions(config.seed, trials)
    if dist is None:
        raise ConfigError("this claim needs --dist (possibly 'random') or --family")
    return [dist]


def cmd_check(config: RunConfig) -> int:
    claim = config.extras["claim"]
    bits = config.precision_bits

    if claim in ("logconvex", "logconcave"):
        dist = config.distribution
        if dist is None or dist is _RANDOM_POOL:
            raise ConfigError(f"check {claim} needs a concrete distribution")
        n_range = config.n_range or (1, 12)
        seq = an_sequence(dist, config.extras["f"], n_range, config.method,
                          bits=bits, samples=config.extras["samples"], seed=config.seed)
        checker = check_log_convex if claim == "logconvex" else check_log_concave
        verdict = checker(seq, bits=bits)
        _emit(json.dumps(verdict.to_json_dict(), indent=2, sort_keys=True), config.output_path)
        return _status_exit(verdict.status)

    if claim == "theorem4":
        p = config.p
        if not isinstance(p, int):
            raise ConfigError("theorem4 needs an integer --p >= 2")
        n_max = config.extras.get("n_max") or p * p + 30
        pool = _pool_or_single(config, default_trials=100)
        verdicts = [check_theorem4(moments_of(d, p), p, n_max) for d in pool]
        worst = min(verdicts, key=lambda v: v.margin)
        status = "violated" if any(v.status == "violated" for v in verdicts) else "holds_exact"
        out = {
            "claim": "theorem4", "status": status, "p": p,
            "n_window": [p * p, n_max], "pool_size": len(pool),
            "margin_min": str(worst.margin),
            "max_convexity_onset": max(v.details["convexity_onset"] for v in verdicts),
            "violations": [v.first_violation.to_json_dict()
                           for v in verdicts if v.first_violation],
        }
        _emit(json.dumps(out, indent=2, sort_keys=True), config.output_path)
        return _status_exit(status)

    if claim == "lemma7":
        p = config.p
        if not isinstance(p, int):
            raise ConfigError("lemma7 needs an integer --p >= 2")
        m = config.extras.get("m")
        if m is None:
            m = p - 1
        from .checkers import default_lemma7_grid
        grid = default_lemma7_grid(p, config.extras.get("x_max"))
        report = check_lemma7(p, m, grid)
        _emit(json.dumps(report.to_json_dict(), indent=2, sort_keys=True), config.output_path)
        return _status_exit(report.status)

    if claim == "remark5":
        p = config.p
        if p not in (2, 3):
            raise ConfigError("remark5 needs --p 2 or --p 3")
        pool = _pool_or_single(config, default_trials=50)
        reports = [verify_remark5_decomposition(moments_of(d, p), p) for d in pool]
        status = "holds_exact" if all(r.holds for r in reports) else "violated"
        out = {
            "claim": "remark5", "status": status, "p": p, "pool_size": len(pool),
            "failures": [r.to_json_dict() for r in reports if not r.holds],
            "example": reports[0].to_json_dict(),
        }
        _emit(json.dumps(out, indent=2, sort_keys=True), config.output_path)
        return _status_exit(status)

    if claim == "remark6":
        dist = config.distribution
        if dist is None or dist is _RANDOM_POOL:
            raise ConfigError("remark6 needs a concrete distribution")
        if config.p is None:
            raise ConfigError("remark6 needs --p (p < 0 or 0 < p < 1/2)")
        n = (config.n_range or (3, 3))[0]
        report = check_remark6_factor(dist, config.p, n, bits=bits)
        _emit(json.dumps(report.to_json_dict(), indent=2, sort_keys=True), config.output_path)
        return _status_exit(report.status)

    raise ConfigError(f"unknown claim {claim!r}")


def cmd_search(config: RunConfig) -> int:
    target = config.extras["target"]

    if target == "conjecture4":
        p_list = config.extras.get("p_list") or ([config.p] if config.p else [2, 3])
        report = search_conjecture4(
            p_list, budget=config.extras.get("budget", 200),
            n_max=config.extras.get("n_max") or 20, seed=config.seed,
            threads=config.extras.get("threads", 1))
        expected = not report.found_violation
    elif target == "remark8":
        p_list = config.extras.get("p_list") or [2, 3, 7]
        trials = config.extras.get("trials") or 100000
        n = (config.n_range or (2, 2))[0]
        report = remark8_random_scan(trials, p_list, seed=config.seed, n=n,
                                     bits=config.precision_bits)
        expected = not report.found_violation
    elif target == "final_remark":
        report = find_final_remark_counterexample(
            config.extras.get("a_grid"), config.extras.get("theta_grid"),
            config.extras.get("n_max") or 6)
        expected = report.found_violation  # falsity is the documented outcome
    else:
        raise ConfigError(f"unknown target {target!r}")

    _emit(report.to_json_text(), config.output_path)
    return EXIT_OK if expected else EXIT_VIOLATED


def _config_from_args(args) -> RunConfig:
    bits = args.precision_bits
    if bits is not None:
        validate_precision(bits)
    config = RunConfig(
        command=args.command,
        distribution=_build_distribution(args),
        p=_parse_rational(args.p) if args.p is not None else None,
        method=getattr(args, "method", "auto"),
        precision_bits=bits,
        seed=args.seed,
        output_format=args.format,
        output_path=args.output,
    )
    if args.command == "compute":
        config.n_range = _parse_n_range(args.n)
        config.extras["f"] = _build_function(args)
        config.extras["samples"] = args.samples
    elif args.command == "check":
        config.extras["claim"] = args.claim
        config.n_range = _parse_n_range(args.n) if args.n else None
        if args.claim in ("logconvex", "logconcave"):
            config.extras["f"] = _build_function(args)
        config.extras["samples"] = getattr(args, "samples", 10000)
        config.extras["n_max"] = args.n_max
        config.extras["m"] = args.m
        config.extras["x_max"] = as_fraction(args.x_max) if args.x_max else None
        config.extras["trials"] = args.trials
    elif args.command == "search":
        config.extras["target"] = args.target
        config.n_range = _parse_n_range(args.n) if args.n else None
        config.extras["p_list"] = _parse_list(args.p_list) if args.p_list else None
        config.extras["n_max"] = args.n_max
        config.extras["budget"] = args.budget
        config.extras["trials"] = args.trials
        config.extras["threads"] = args.threads
        config.extras["a_grid"] = _parse_list(args.a_grid) if args.a_grid else None
        config.extras["theta_grid"] = _parse_list(args.theta_grid) if args.theta_grid else None
    return config


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        if args.command == "compute":
            return cmd_compute(config)
        if args.command == "check":
            return cmd_check(config)
        if args.command == "search":
            return cmd_search(config)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENT


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
