"""Dyadic interval arithmetic used for real-embedding evaluation.

Endpoints are kept as exact `Fraction` values; constructors and the
rounding helpers keep them dyadic (denominator a power of two), so every
interval is an exact, machine-checkable enclosure of the real it stands
for.  All decisions made from intervals (signs, floors) are refined until
unambiguous or the global precision cap is hit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

DEFAULT_BITS = 64
MAX_BITS = 1 << 16

_ZERO = Fraction(0)
_ONE = Fraction(1)


class PrecisionError(ArithmeticError):
    """Adaptive refinement hit the precision cap without resolving its query.

    Exact zeros are caught symbolically before any refinement loop starts,
    so reaching the cap signals an internal inconsistency rather than a
    recoverable numeric condition.
    """


def round_down(x: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(x.numerator * scale // x.denominator, scale)


def round_up(x: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(-((-x.numerator * scale) // x.denominator), scale)


def sqrt_down(x: Fraction, bits: int) -> Fraction:
    """Dyadic lower bound for sqrt(x) with `bits` fractional bits."""
    if x < 0:
        raise ValueError("negative radicand")
    scale = 1 << bits
    return Fraction(isqrt(x.numerator * scale * scale // x.denominator), scale)


def sqrt_up(x: Fraction, bits: int) -> Fraction:
    """Dyadic upper bound for sqrt(x) with `bits` fractional bits."""
    if x < 0:
        raise ValueError("negative radicand")
    scale = 1 << bits
    n = -((-x.numerator * scale * scale) // x.denominator)
    r = isqrt(n)
    if r * r < n:
        r += 1
    return Fraction(r, scale)


def effective_bits(lo: Fraction, hi: Fraction) -> int:
    """Largest p with width <= 2^(1-p) * max(1, |lo|), capped at MAX_BITS."""
    width = hi - lo
    if width == 0:
        return MAX_BITS
    ratio = 2 * max(_ONE, abs(lo)) / width
    if ratio < 2:
        return 1
    p = (ratio.numerator // ratio.denominator).bit_length() - 1
    return min(p, MAX_BITS)


@dataclass(frozen=True)
class RealInterval:
    lo: Fraction
    hi: Fraction
    precision_bits: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError("interval endpoints out of order")

    @classmethod
    def of(cls, lo: Fraction, hi: Fraction) -> RealInterval:
        return cls(lo, hi, effective_bits(lo, hi))

    @classmethod
    def point(cls, value: Fraction | int) -> RealInterval:
        q = Fraction(value)
        return cls(q, q, MAX_BITS)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def sign(self) -> int | None:
        """-1, 0 or +1 when unambiguous, None when the interval straddles 0."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == 0 and self.hi == 0:
            return 0
        return None

    def contains(self, value: Fraction | int | float) -> bool:
        return self.lo <= value <= self.hi

    def overlaps(self, other: RealInterval) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __neg__(self) -> RealInterval:
        return RealInterval.of(-self.hi, -self.lo)

    def __add__(self, other: RealInterval | Fraction | int) -> RealInterval:
        if isinstance(other, RealInterval):
            return RealInterval.of(self.lo + other.lo, self.hi + other.hi)
        if isinstance(other, (int, Fraction)):
            return RealInterval.of(self.lo + other, self.hi + other)
        return NotImplemented

    def __sub__(self, other: RealInterval | Fraction | int) -> RealInterval:
        if isinstance(other, RealInterval):
            return RealInterval.of(self.lo - other.hi, self.hi - other.lo)
        if isinstance(other, (int, Fraction)):
            return RealInterval.of(self.lo - other, self.hi - other)
        return NotImplemented

    def __mul__(self, other: RealInterval | Fraction | int) -> RealInterval:
        if isinstance(other, RealInterval):
            products = (
                self.lo * other.lo,
                self.lo * other.hi,
                self.hi * other.lo,
                self.hi * other.hi,
            )
            return RealInterval.of(min(products), max(products))
        if isinstance(other, (int, Fraction)):
            if other >= 0:
                return RealInterval.of(self.lo * other, self.hi * other)
            return RealInterval.of(self.hi * other, self.lo * other)
        return NotImplemented

    __rmul__ = __mul__

    def __abs__(self) -> RealInterval:
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RealInterval.of(_ZERO, max(-self.lo, self.hi))

    def max_with(self, other: RealInterval | Fraction | int) -> RealInterval:
        if isinstance(other, (int, Fraction)):
            other = RealInterval.point(other)
        return RealInterval.of(max(self.lo, other.lo), max(self.hi, other.hi))

    def sqrt(self, bits: int = DEFAULT_BITS) -> RealInterval:
        # A lower endpoint slightly below 0 is rounding noise for a value
        # known to be nonnegative; clamp before taking the root.
        lo = self.lo if self.lo > 0 else _ZERO
        if self.hi < 0:
            raise ValueError("interval entirely negative under sqrt")
        return RealInterval.of(sqrt_down(lo, bits), sqrt_up(self.hi, bits))

    def root4(self, bits: int = DEFAULT_BITS) -> RealInterval:
        return self.sqrt(bits).sqrt(bits)

    def rounded(self, bits: int) -> RealInterval:
        return RealInterval.of(round_down(self.lo, bits), round_up(self.hi, bits))

    def __float__(self) -> float:
        return float(self.mid)

    def __str__(self) -> str:
        return f"[{float(self.lo):.12g}, {float(self.hi):.12g}]"
