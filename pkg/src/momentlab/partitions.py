"""Integer partitions into a fixed number of parts, with the coefficients
that expand moments of sums of i.i.d. variables over partition classes.

Everything here is exact integer arithmetic; no floats enter this module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

# Hard ceiling for the moment order p.  Factorial and Stirling tables are
# precomputed to this size; exceeding it is an error, never a truncation.
MAX_ORDER = 64

_FACTORIAL = tuple(math.factorial(i) for i in range(MAX_ORDER + 1))


def _stirling_table(limit: int) -> tuple[tuple[int, ...], ...]:
    rows = [[1] + [0] * limit]
    for p in range(1, limit + 1):
        prev = rows[-1]
        row = [0] * (limit + 1)
        for k in range(1, p + 1):
            row[k] = k * prev[k] + prev[k - 1]
        rows.append(row)
    return tuple(tuple(r) for r in rows)


_STIRLING2 = _stirling_table(MAX_ORDER)


@dataclass(frozen=True)
class Partition:
    """A multiset of positive integers, stored as a nondecreasing tuple."""

    parts: tuple[int, ...]

    def __post_init__(self):
        if not self.parts:
            raise DomainError("a partition needs at least one part")
        if any(not isinstance(q, int) or q < 1 for q in self.parts):
            raise DomainError(f"parts must be positive integers, got {self.parts}")
        if any(a > b for a, b in zip(self.parts, self.parts[1:])):
            object.__setattr__(self, "parts", tuple(sorted(self.parts)))

    @property
    def m(self) -> int:
        """Number of parts."""
        return len(self.parts)

    @property
    def p(self) -> int:
        """Sum of parts."""
        return sum(self.parts)

    @property
    def multiplicities(self) -> tuple[tuple[int, int], ...]:
        """(value, count) pairs for the distinct part values, ascending."""
        out = []
        for q in self.parts:
            if out and out[-1][0] == q:
                out[-1][1] += 1
            else:
                out.append([q, 1])
        return tuple((v, c) for v, c in out)

    def __contains__(self, value: int) -> bool:
        return value in self.parts

    def __str__(self) -> str:
        return "{" + ",".join(str(q) for q in self.parts) + "}"


def enumerate_partitions(p: int, m: int) -> list[Partition]:
    """All partitions of p into exactly m parts, in lexicographic order.

    The order is on the nondecreasing parts vector, so output is
    byte-for-byte reproducible.
    """
    if p > MAX_ORDER:
        raise DomainError(f"p={p} exceeds the ceiling {MAX_ORDER}")
    if m < 1 or m > p:
        raise DomainError(f"need 1 <= m <= p, got m={m}, p={p}")
    out: list[Partition] = []

    def grow(prefix: tuple[int, ...], remaining: int, k: int, lo: int):
        if k == 1:
            out.append(Partition(prefix + (remaining,)))
            return
        # next part q keeps the vector nondecreasing and leaves room for k-1 more
        for q in range(lo, remaining // k + 1):
            grow(prefix + (q,), remaining - q, k - 1, q)

    grow((), p, m, 1)
    return out


def alpha(q: Partition) -> int:
    """Product of factorials of the part multiplicities."""
    result = 1
    for _, count in q.multiplicities:
        result *= _FACTORIAL[count]
    return result


def beta(q: Partition) -> int:
    """p! / (alpha(q) * q_1! ... q_m!); always a positive integer."""
    if q.p > MAX_ORDER:
        raise DomainError(f"partition sum {q.p} exceeds the ceiling {MAX_ORDER}")
    den = alpha(q)
    for part in q.parts:
        den *= _FACTORIAL[part]
    num, rem = divmod(_FACTORIAL[q.p], den)
    assert rem == 0, f"beta({q}) is not integral"
    return num


def stirling2(p: int, k: int) -> int:
    """Stirling number of the second kind S(p, k); S(p, k) = 0 for k > p."""
    if p < 0 or k < 0:
        raise DomainError(f"need p, k >= 0, got p={p}, k={k}")
    if p > MAX_ORDER:
        raise DomainError(f"p={p} exceeds the ceiling {MAX_ORDER}")
    if k > p:
        return 0
    return _STIRLING2[p][k]


def falling_factorial(n: int, m: int) -> int:
    """n (n-1) ... (n-m+1); 1 when m = 0, and 0 when m > n."""
    if n < 1:
        raise DomainError(f"need n >= 1, got n={n}")
    if m < 0:
        raise DomainError(f"need m >= 0, got m={m}")
    return math.perm(n, m)
