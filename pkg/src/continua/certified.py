"""Rational helpers and certified real intervals."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from numbers import Rational

DEFAULT_WIDTH = Fraction(1, 10**9)

_RATIONAL_TEXT = re.compile(r"^\s*-?\d+(\s*/\s*\d+)?\s*$")


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected on purpose: every quantity in this package is exact.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        if not _RATIONAL_TEXT.match(x):
            raise ValueError(f"not a rational literal: {x!r}")
        return Fraction(x.replace(" ", ""))
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def format_fraction(x: Fraction) -> str:
    """Serialise as ``"p/q"``, always with an explicit denominator."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _sqrt_floor(x: Fraction, scale: int) -> Fraction:
    # floor(sqrt(x) * scale) / scale
    return Fraction(isqrt(x.numerator * scale * scale // x.denominator), scale)


def rational_sqrt(x: Fraction) -> Fraction | None:
    """Exact square root when ``x`` is the square of a rational."""
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _scale_for(width: Fraction) -> int:
    scale = 1
    while Fraction(1, scale) > width:
        scale *= 2
    return scale


@dataclass(frozen=True)
class CertifiedValue:
    """A closed interval ``[lower, upper]`` guaranteed to contain a real value."""

    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        lo, hi = as_fraction(self.lower), as_fraction(self.upper)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def exact(cls, x) -> CertifiedValue:
        x = as_fraction(x)
        return cls(x, x)

    @property
    def is_exact(self) -> bool:
        return self.lower == self.upper

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def value(self) -> Fraction:
        if not self.is_exact:
            raise ValueError("value is only certified to an interval")
        return self.lower

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    def contains(self, x) -> bool:
        return self.lower <= as_fraction(x) <= self.upper

    def __add__(self, other: CertifiedValue) -> CertifiedValue:
        other = _lift(other)
        return CertifiedValue(self.lower + other.lower, self.upper + other.upper)

    __radd__ = __add__

    def __sub__(self, other: CertifiedValue) -> CertifiedValue:
        other = _lift(other)
        return CertifiedValue(self.lower - other.upper, self.upper - other.lower)

    def __neg__(self) -> CertifiedValue:
        return CertifiedValue(-self.upper, -self.lower)

    def scale(self, c) -> CertifiedValue:
        c = as_fraction(c)
        a, b = c * self.lower, c * self.upper
        return CertifiedValue(min(a, b), max(a, b))

    def dotminus(self, other: CertifiedValue) -> CertifiedValue:
        """Truncated subtraction ``max(self - other, 0)``."""
        d = self - _lift(other)
        return CertifiedValue(max(d.lower, 0), max(d.upper, 0))

    def sqrt(self, width: Fraction = DEFAULT_WIDTH) -> CertifiedValue:
        """Outward-rounded square root. The interval must be nonnegative."""
        if self.lower < 0:
            raise ValueError("square root of an interval reaching below zero")
        lo_exact = rational_sqrt(self.lower)
        hi_exact = rational_sqrt(self.upper)
        scale = _scale_for(as_fraction(width) / 2)
        lo = lo_exact if lo_exact is not None else _sqrt_floor(self.lower, scale)
        if hi_exact is not None:
            hi = hi_exact
        else:
            hi = _sqrt_floor(self.upper, scale) + Fraction(1, scale)
        return CertifiedValue(lo, hi)

    def __str__(self) -> str:
        if self.is_exact:
            return str(self.lower)
        return f"[{self.lower}, {self.upper}]"

    def to_json(self) -> dict:
        return {"lower": format_fraction(self.lower), "upper": format_fraction(self.upper)}

    @classmethod
    def from_json(cls, obj: dict) -> CertifiedValue:
        return cls(as_fraction(obj["lower"]), as_fraction(obj["upper"]))


def _lift(x) -> CertifiedValue:
    return x if isinstance(x, CertifiedValue) else CertifiedValue.exact(x)


def cmax(*values: CertifiedValue) -> CertifiedValue:
    vals = [_lift(v) for v in values]
    return CertifiedValue(max(v.lower for v in vals), max(v.upper for v in vals))


def cmin(*values: CertifiedValue) -> CertifiedValue:
    vals = [_lift(v) for v in values]
    return CertifiedValue(min(v.lower for v in vals), min(v.upper for v in vals))
