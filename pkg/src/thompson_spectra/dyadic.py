"""Exact dyadic rationals and the two standard generators of Thompson's group F.

Both generators are piecewise linear with dyadic breakpoints and slopes that
are powers of two, so they map dyadic rationals to dyadic rationals and can be
evaluated without rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

from .errors import DomainError

_HALF = Fraction(1, 2)
_QUARTER = Fraction(1, 4)
_THREE_QUARTERS = Fraction(3, 4)


@total_ordering
@dataclass(frozen=True)
class DyadicRational:
    """The number ``numerator / 2**exponent`` stored in lowest terms."""

    numerator: int
    exponent: int = 0

    def __post_init__(self):
        if self.exponent < 0:
            raise DomainError("exponent must be non-negative")
        num, exp = self.numerator, self.exponent
        while exp > 0 and num % 2 == 0:
            num //= 2
            exp -= 1
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "exponent", exp)

    @classmethod
    def from_fraction(cls, value) -> DyadicRational:
        value = Fraction(value)
        den = value.denominator
        if den & (den - 1):
            raise DomainError(f"{value} is not a dyadic rational")
        return cls(value.numerator, den.bit_length() - 1)

    @classmethod
    def parse(cls, text: str) -> DyadicRational:
        try:
            return cls.from_fraction(Fraction(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse {text!r} as a dyadic rational") from exc

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def in_open_unit_interval(self) -> bool:
        return 0 < self.numerator < (1 << self.exponent)

    def __lt__(self, other):
        if not isinstance(other, DyadicRational):
            return NotImplemented
        return self.value < other.value

    def __str__(self):
        if self.exponent == 0:
            return str(self.numerator)
        return f"{self.numerator}/{1 << self.exponent}"


def _a(v: Fraction) -> Fraction:
    if v < _HALF:
        return v / 2
    if v < _THREE_QUARTERS:
        return v - _QUARTER
    return 2 * v - 1


def _a_inv(v: Fraction) -> Fraction:
    if v < _QUARTER:
        return 2 * v
    if v < _HALF:
        return v + _QUARTER
    return (v + 1) / 2


def _b(v: Fraction) -> Fraction:
    if v < _HALF:
        return v
    return _a(2 * v - 1) / 2 + _HALF


def _b_inv(v: Fraction) -> Fraction:
    if v < _HALF:
        return v
    return _a_inv(2 * v - 1) / 2 + _HALF


def _lift(fn):
    def apply(x: DyadicRational) -> DyadicRational:
        v = x.value
        if not 0 <= v <= 1:
            raise DomainError(f"{x} is outside [0, 1]")
        return DyadicRational.from_fraction(fn(v))

    apply.__name__ = fn.__name__.lstrip("_")
    return apply


gen_a = _lift(_a)
gen_a_inv = _lift(_a_inv)
gen_b = _lift(_b)
gen_b_inv = _lift(_b_inv)

#: generator name -> map, in the fixed order used for edge enumeration
GENERATORS = {"a": gen_a, "a^-1": gen_a_inv, "b": gen_b, "b^-1": gen_b_inv}
