"""Moment-sequence container, function descriptors, and CSV/JSON emission.

Exact entries are Fractions; numerical entries are EstimateWithError.  The
serialized forms round-trip: exact rationals are kept as "a/b" strings, and
high-precision values are emitted as their exact dyadic rationals.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction

import mpmath.libmp as _libmp
from mpmath import mp, mpf

from .distributions import EstimateWithError, as_fraction
from .errors import DomainError

# provenance tags for sequence entries
PROVENANCE_TAGS = (
    "partition_formula",
    "stirling_bernoulli",
    "binomial_oracle",
    "convolution_oracle",
    "quadrature",
    "monte_carlo",
    "laplace_power",
)


@dataclass(frozen=True)
class PowerFunction:
    """f(x) = x^p."""

    exponent: Fraction

    def __post_init__(self):
        e = as_fraction(self.exponent)
        object.__setattr__(self, "exponent", int(e) if e.denominator == 1 else e)

    def label(self) -> str:
        return f"x^{self.exponent}"

    def to_dict(self) -> dict:
        return {"kind": "power", "p": str(self.exponent)}


@dataclass(frozen=True)
class HingeFunction:
    """f(x) = max(x - a, 0)."""

    threshold: Fraction

    def __post_init__(self):
        object.__setattr__(self, "threshold", as_fraction(self.threshold))

    def label(self) -> str:
        return f"max(x-{self.threshold},0)"

    def to_dict(self) -> dict:
        return {"kind": "hinge", "a": str(self.threshold)}


@dataclass(frozen=True)
class ExpDecayFunction:
    """f(x) = exp(-s x)."""

    rate: Fraction

    def __post_init__(self):
        rate = as_fraction(self.rate)
        if rate <= 0:
            raise DomainError(f"decay rate must be positive, got {rate}")
        object.__setattr__(self, "rate", rate)

    def label(self) -> str:
        return f"exp(-{self.rate}*x)"

    def to_dict(self) -> dict:
        return {"kind": "exp_decay", "s": str(self.rate)}


FunctionDescriptor = PowerFunction | HingeFunction | ExpDecayFunction


def function_from_dict(d: dict) -> FunctionDescriptor:
    kind = d.get("kind")
    if kind == "power":
        return PowerFunction(as_fraction(d["p"]))
    if kind == "hinge":
        return HingeFunction(as_fraction(d["a"]))
    if kind == "exp_decay":
        return ExpDecayFunction(as_fraction(d["s"]))
    raise DomainError(f"unknown function descriptor {d!r}")


@dataclass(frozen=True)
class MomentSequence:
    """Values of E f((X_1+...+X_n)/n) over a contiguous n range.

    Each entry carries its own provenance tag, so downstream verdicts can
    state what kind of evidence they rest on.
    """

    f: FunctionDescriptor | None
    n_start: int
    values: tuple
    provenance: tuple[str, ...]
    precision_bits: int | None = None

    def __post_init__(self):
        if self.n_start < 1:
            raise DomainError(f"n must start at 1 or later, got {self.n_start}")
        if len(self.values) != len(self.provenance):
            raise DomainError("values and provenance lengths differ")
        if not self.values:
            raise DomainError("empty sequence")
        for v in self.values:
            if isinstance(v, Fraction):
                if v < 0:
                    raise DomainError(f"sequence values must be nonnegative, got {v}")
            elif isinstance(v, EstimateWithError):
                if float(v.value) < 0:
                    raise DomainError(f"sequence values must be nonnegative, got {v.value}")
            else:
                raise DomainError(f"sequence values must be Fraction or EstimateWithError, got {type(v).__name__}")

    @property
    def n_range(self) -> range:
        return range(self.n_start, self.n_start + len(self.values))

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.values)

    def value_at(self, n: int):
        if n not in self.n_range:
            raise DomainError(f"n={n} outside {self.n_range}")
        return self.values[n - self.n_start]

    def provenance_at(self, n: int) -> str:
        return self.provenance[n - self.n_start]


def mpf_to_fraction(x) -> Fraction:
    """Exact rational value of an mpmath float (every mpf is dyadic)."""
    raw = x._mpf_ if hasattr(x, "_mpf_") else mpf(x)._mpf_
    p, q = _libmp.to_rational(raw)
    return Fraction(int(p), int(q))


def _encode_value(v) -> tuple[str, str]:
    """(value_str, error_bound_str) for one entry."""
    if isinstance(v, Fraction):
        return str(v), "0"
    bound = float(v.error_bound)
    if bound == 0:
        bound = 5e-324  # keep estimates distinguishable from exact entries
    if isinstance(v.value, float):
        return repr(v.value), repr(bound)
    return str(mpf_to_fraction(v.value)), repr(bound)


def _decode_value(value_str: str, bound_str: str, kind: str):
    if bound_str == "0":
        return Fraction(value_str)
    bound = float(bound_str)
    if "/" in value_str or value_str.lstrip("-").isdigit():
        fr = Fraction(value_str)
        # denominators are powers of two here, so this reconstruction is exact
        with mp.workprec(max(fr.numerator.bit_length(), 64) + 8):
            value = mpf(fr.numerator) / mpf(fr.denominator)
    else:
        value = float(value_str)
    return EstimateWithError(value, bound, kind)


def _kind_for_provenance(tag: str) -> str:
    if tag == "monte_carlo":
        return "monte_carlo"
    if tag == "quadrature":
        return "quadrature"
    return "direct"


CSV_COLUMNS = ("n", "value", "provenance", "error_bound")


def write_csv(seq: MomentSequence, fh) -> None:
    """Emit the fixed n,value,provenance,error_bound table."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for n in seq.n_range:
        value_str, bound_str = _encode_value(seq.value_at(n))
        writer.writerow([n, value_str, seq.provenance_at(n), bound_str])


def to_csv_text(seq: MomentSequence) -> str:
    buf = io.StringIO()
    write_csv(seq, buf)
    return buf.getvalue()


def read_csv(text: str, f: FunctionDescriptor | None = None,
             precision_bits: int | None = None) -> MomentSequence:
    """Parse a table produced by write_csv back into a MomentSequence."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise DomainError(f"expected header {','.join(CSV_COLUMNS)}")
    ns, values, tags = [], [], []
    for row in rows[1:]:
        if not row:
            continue
        n, value_str, tag, bound_str = row
        ns.append(int(n))
        tags.append(tag)
        values.append(_decode_value(value_str, bound_str, _kind_for_provenance(tag)))
    if ns != list(range(ns[0], ns[0] + len(ns))):
        raise DomainError("CSV rows must cover a contiguous n range")
    return MomentSequence(f, ns[0], tuple(values), tuple(tags), precision_bits)


def to_json_dict(seq: MomentSequence) -> dict:
    entries = []
    for n in seq.n_range:
        v = seq.value_at(n)
        value_str, bound_str = _encode_value(v)
        entry = {"n": n, "value": value_str, "provenance": seq.provenance_at(n),
                 "error_bound": bound_str}
        if isinstance(v, EstimateWithError):
            entry["kind"] = v.kind
        entries.append(entry)
    return {
        "f": seq.f.to_dict() if seq.f is not None else None,
        "n_start": seq.n_start,
        "precision_bits": seq.precision_bits,
        "entries": entries,
    }


def sequence_from_json(d: dict) -> MomentSequence:
    f = function_from_dict(d["f"]) if d.get("f") else None
    values, tags = [], []
    for entry in d["entries"]:
        tag = entry["provenance"]
        kind = entry.get("kind") or _kind_for_provenance(tag)
        values.append(_decode_value(entry["value"], entry["error_bound"], kind))
        tags.append(tag)
    return MomentSequence(f, d["n_start"], tuple(values), tuple(tags), d.get("precision_bits"))


def to_json_text(seq: MomentSequence) -> str:
    return json.dumps(to_json_dict(seq), indent=2, sort_keys=True)
