"""Double-double arithmetic and compensated summation.

A double-double number is an unevaluated sum ``hi + lo`` of two floats with
``|lo| <= ulp(hi)/2``, giving roughly 32 significant decimal digits.  Only the
operations needed by the reflection-sum evaluator are provided.
"""
from __future__ import annotations

import math
from typing import Iterable

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    return s, b - (s - a)


def split(a: float) -> tuple[float, float]:
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a: float, b: float) -> tuple[float, float]:
    """Exact product ``a*b = p + e`` via Dekker splitting."""
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


class DD:
    __slots__ = ("hi", "lo")

    def __init__(self, hi: float, lo: float = 0.0):
        self.hi = float(hi)
        self.lo = float(lo)

    @classmethod
    def from_mpf(cls, value) -> "DD":
        import mpmath

        hi = float(value)
        lo = float(mpmath.mpf(value) - hi)
        return cls(*quick_two_sum(hi, lo))

    def __float__(self) -> float:
        return self.hi + self.lo

    def __repr__(self) -> str:
        return f"DD({self.hi!r}, {self.lo!r})"

    def __neg__(self) -> "DD":
        return DD(-self.hi, -self.lo)

    def __add__(self, other) -> "DD":
        if not isinstance(other, DD):
            s, e = two_sum(self.hi, float(other))
            e += self.lo
            return DD(*quick_two_sum(s, e))
        s, e = two_sum(self.hi, other.hi)
        t, f = two_sum(self.lo, other.lo)
        e += t
        s, e = quick_two_sum(s, e)
        e += f
        return DD(*quick_two_sum(s, e))

    __radd__ = __add__

    def __sub__(self, other) -> "DD":
        return self + (-other if isinstance(other, DD) else -float(other))

    def __rsub__(self, other) -> "DD":
        return (-self) + other

    def __mul__(self, other) -> "DD":
        if not isinstance(other, DD):
            b = float(other)
            p, e = two_prod(self.hi, b)
            e += self.lo * b
            return DD(*quick_two_sum(p, e))
        p, e = two_prod(self.hi, other.hi)
        e += self.hi * other.lo + self.lo * other.hi
        return DD(*quick_two_sum(p, e))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "DD":
        if isinstance(other, DD):
            q1 = self.hi / other.hi
            r = self - other * q1
            q2 = r.hi / other.hi
            r = r - other * q2
            q3 = r.hi / other.hi
            return DD(*quick_two_sum(q1, q2)) + q3
        b = float(other)
        q1 = self.hi / b
        p, e = two_prod(q1, b)
        s, f = two_sum(self.hi, -p)
        f = f - e + self.lo
        q2 = (s + f) / b
        return DD(*quick_two_sum(q1, q2))

    def ldexp(self, k: int) -> "DD":
        return DD(math.ldexp(self.hi, k), math.ldexp(self.lo, k))

    def __abs__(self) -> "DD":
        return -self if self.hi < 0 else self

    def sign(self) -> int:
        v = self.hi if self.hi != 0.0 else self.lo
        return (v > 0) - (v < 0)


LN2 = DD(0.6931471805599453, 2.3190468138462996e-17)

_EXP_SQUARINGS = 10
_EXP_TERMS = 12
_INV_FACT = [1.0 / math.factorial(n) for n in range(_EXP_TERMS + 1)]


def dd_exp(a: DD) -> DD:
    """exp of a double-double argument, relative error near 1e-31."""
    if a.hi > 709.0:
        raise OverflowError("dd_exp overflow")
    if a.hi < -745.0:
        return DD(0.0)
    k = int(round(a.hi / LN2.hi))
    r = (a - LN2 * k).ldexp(-_EXP_SQUARINGS)
    # Taylor series of expm1(r); |r| < 4e-4 so twelve terms are plenty.
    term = r
    acc = r
    for n in range(2, _EXP_TERMS + 1):
        term = term * r
        acc = acc + term * _INV_FACT[n]
    # (1 + e)^2 - 1 = e * (2 + e), keeps the small part accurate.
    for _ in range(_EXP_SQUARINGS):
        acc = acc * (acc + 2.0)
    return (acc + 1.0).ldexp(k)


def dd_sum(values: Iterable) -> DD:
    acc = DD(0.0)
    for v in values:
        acc = acc + v
    return acc


def neumaier_sum(values: Iterable[float]) -> float:
    """Kahan-Babuska-Neumaier compensated sum."""
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp
