"""Working-precision control for all high-precision (mpmath) evaluation.

Every report that contains high-precision numbers records the bit precision
they were computed at, so results can be reproduced exactly.
"""
from __future__ import annotations

import os
from contextlib import contextmanager
from fractions import Fraction

from mpmath import mp, mpf

from .errors import ConfigError

DEFAULT_PRECISION_BITS = 200
MIN_PRECISION_BITS = 64
PRECISION_ENV_VAR = "MOMENTLAB_PRECISION_BITS"


def default_precision() -> int:
    """Default bit precision; MOMENTLAB_PRECISION_BITS overrides the built-in."""
    raw = os.environ.get(PRECISION_ENV_VAR)
    if raw is None:
        return DEFAULT_PRECISION_BITS
    try:
        bits = int(raw)
    except ValueError:
        raise ConfigError(f"{PRECISION_ENV_VAR} must be an integer, got {raw!r}")
    return validate_precision(bits)


def validate_precision(bits: int) -> int:
    if bits < MIN_PRECISION_BITS:
        raise ConfigError(f"precision must be at least {MIN_PRECISION_BITS} bits, got {bits}")
    return bits


@contextmanager
def working_precision(bits: int | None = None, guard: int = 0):
    """Context manager setting mpmath precision to ``bits`` (+ guard bits)."""
    bits = default_precision() if bits is None else validate_precision(bits)
    with mp.workprec(bits + guard):
        yield bits


def to_mpf(x) -> mpf:
    """Convert int/Fraction/float/mpf to mpf at the current working precision."""
    if isinstance(x, Fraction):
        return mpf(x.numerator) / mpf(x.denominator)
    return mpf(x)
