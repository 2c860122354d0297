"""Exact costs: rationals plus a distinguished infinity."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


class _Infinity:
    """Absorbing under addition; ``0 * INF == 0``."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    __str__ = __repr__

    def __reduce__(self):
        return (_Infinity, ())

    def __hash__(self):
        return hash("ucqres-inf")

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        if other is self or isinstance(other, Rational):
            return self
        return NotImplemented

    __radd__ = __add__

    def __mul__(self, other):
        if other is self:
            return self
        if isinstance(other, Rational):
            if other < 0:
                raise ValueError("negative multiple of infinity")
            return Fraction(0) if other == 0 else self
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        raise ValueError("negative infinity is not a cost")


INF = _Infinity()

Value = Fraction | _Infinity


def to_value(x) -> Value:
    """Coerce ints, Fractions, 'p/q' strings and 'inf' to a cost."""
    if x is INF:
        return INF
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "infinity", "∞"):
            return INF
        return Fraction(s)
    if isinstance(x, float):
        if x == float("inf"):
            return INF
        raise TypeError("floating-point costs are not accepted; use Fraction")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    raise TypeError(f"not a cost: {x!r}")


def is_finite(x) -> bool:
    return x is not INF


def format_value(x: Value) -> str:
    if x is INF:
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def vsum(values) -> Value:
    total: Value = Fraction(0)
    for v in values:
        total = total + v
        if total is INF:
            return INF
    return total
