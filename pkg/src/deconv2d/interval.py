"""Outward-rounded interval arithmetic.

Every rigorous bound in this package is a supremum of a nonlinear expression
over a box of parameters, evaluated by replacing each real operation with its
interval extension.  The contract is containment soundness: for intervals
``a``, ``b`` and any x in a, y in b, ``op(x, y)`` lies inside ``op(a, b)`` as
an exact float comparison.

Rounding policy
---------------
Directed rounding is emulated by post-operation one-ulp nudging: after each
elementary operation the lower endpoint is moved one float down and the upper
one float up (``math.nextafter``).  This is portable and strictly
conservative; the envelopes downstream tolerate the slack because they are
upper bounds by construction.  ``exp`` widens by two ulps to cover a possible
one-ulp libm error on top of our own rounding step.

Only the operations the envelope formulas need are provided; this is not a
general-purpose interval library.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_INF = math.inf


class DivisionByZeroInterval(ZeroDivisionError):
    """Raised when dividing by an interval that contains zero."""


class DomainError(ValueError):
    """Raised when an operation's domain excludes the whole input interval."""


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


@dataclass(frozen=True)
class Interval:
    """A closed real interval [lo, hi] with lo <= hi.

    Endpoints are floats; ``hi`` may be +inf transiently (overflow of an
    intermediate) but ``lo`` is always finite for the expressions we build.
    """

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo <= self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def point(x: float) -> "Interval":
        return Interval(x, x)

    @staticmethod
    def hull(*xs: float) -> "Interval":
        return Interval(min(xs), max(xs))

    # -- predicates --------------------------------------------------------

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def _widened(self) -> "Interval":
        return Interval(_down(self.lo), _up(self.hi))

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)._widened()

    def __sub__(self, other: "Interval") -> "Interval":
        return Interval(self.lo - other.hi, self.hi - other.lo)._widened()

    def __neg__(self) -> "Interval":
        # Negation of floats is exact: no widening.
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other: "Interval") -> "Interval":
        ps = (self.lo * other.lo, self.lo * other.hi,
              self.hi * other.lo, self.hi * other.hi)
        return Interval(min(ps), max(ps))._widened()

    def __truediv__(self, other: "Interval") -> "Interval":
        if other.lo <= 0.0 <= other.hi:
            raise DivisionByZeroInterval(
                f"divisor interval [{other.lo}, {other.hi}] contains 0")
        qs = (self.lo / other.lo, self.lo / other.hi,
              self.hi / other.lo, self.hi / other.hi)
        return Interval(min(qs), max(qs))._widened()

    def sqr(self) -> "Interval":
        """x^2 over the interval; tighter than self*self when 0 is inside."""
        a, b = abs(self.lo), abs(self.hi)
        m, M = min(a, b), max(a, b)
        hi = M * M  # plain multiply (pow() can differ by an ulp)
        lo = 0.0 if self.lo <= 0.0 <= self.hi else m * m
        return Interval(lo, _up(hi)) if lo == 0.0 else Interval(_down(lo), _up(hi))

    def sqrt(self) -> "Interval":
        """Square root; a lower endpoint that is negative rounding noise is
        clamped to 0.  Raises DomainError when the whole interval is negative.
        """
        if self.hi < 0.0:
            raise DomainError(f"sqrt of negative interval [{self.lo}, {self.hi}]")
        lo = 0.0 if self.lo <= 0.0 else max(0.0, _down(math.sqrt(self.lo)))
        return Interval(lo, _up(math.sqrt(self.hi)))

    def exp(self) -> "Interval":
        # libm exp is assumed faithfully rounded (<= 1 ulp error); widen by
        # two ulps per endpoint to cover it plus our own rounding.  Arguments
        # past the double overflow threshold saturate at +inf (still sound).
        def _exp(x: float) -> float:
            try:
                return math.exp(x)
            except OverflowError:
                return _INF

        lo = max(0.0, _down(_down(_exp(self.lo))))
        hi = _exp(self.hi)
        return Interval(lo, hi if hi == _INF else _up(_up(hi)))

    def __abs__(self) -> "Interval":
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    def imax(self, other: "Interval") -> "Interval":
        # Exact endpoint max: no widening needed.
        return Interval(max(self.lo, other.lo), max(self.hi, other.hi))

    def imin(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), min(self.hi, other.hi))

    def scale(self, c: float) -> "Interval":
        """Multiplication by a scalar constant."""
        return self * Interval.point(c)


def iv_arith(op: str, a: Interval, b: Interval | None = None) -> Interval:
    """Dispatch an elementary interval operation by name.

    ``op`` is one of {add, sub, mul, neg, div, sqr, sqrt, exp, abs, max, min};
    binary ops require ``b``.
    """
    unary = {"neg": Interval.__neg__, "sqr": Interval.sqr,
             "sqrt": Interval.sqrt, "exp": Interval.exp,
             "abs": Interval.__abs__}
    binary = {"add": Interval.__add__, "sub": Interval.__sub__,
              "mul": Interval.__mul__, "div": Interval.__truediv__,
              "max": Interval.imax, "min": Interval.imin}
    if op in unary:
        if b is not None:
            raise TypeError(f"{op} is unary")
        return unary[op](a)
    if op in binary:
        if b is None:
            raise TypeError(f"{op} needs two operands")
        return binary[op](a, b)
    raise ValueError(f"unknown interval op {op!r}")


@dataclass(frozen=True)
class Interval2:
    """An axis-aligned rectangle: the product of two intervals."""

    x: Interval
    y: Interval

    @staticmethod
    def point(px: float, py: float) -> "Interval2":
        return Interval2(Interval.point(px), Interval.point(py))

    def __add__(self, other: "Interval2") -> "Interval2":
        return Interval2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Interval2") -> "Interval2":
        return Interval2(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "Interval2":
        return Interval2(-self.x, -self.y)

    def norm_sq(self) -> Interval:
        """Contains {x^2 + y^2 : (x, y) in the rectangle}."""
        return self.x.sqr() + self.y.sqr()


def iv_norm_sq(p: Interval2) -> Interval:
    return p.norm_sq()
