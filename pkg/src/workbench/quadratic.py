"""Exact arithmetic in Q(sqrt 2)."""
from __future__ import annotations

from fractions import Fraction
from functools import total_ordering
from math import isqrt


def _floor_sqrt2_times(q: Fraction) -> int:
    """``floor(q * sqrt(2))`` exactly."""
    n, d = q.numerator, q.denominator
    if n >= 0:
        return isqrt(2 * n * n) // d
    # floor(-x) = -ceil(x)
    r = isqrt(2 * n * n)
    exact = r * r == 2 * n * n
    return -((r + (0 if exact else 1) + d - 1) // d)


@total_ordering
class ExactQuadratic:
    """The number ``p + q*sqrt(2)`` with rational ``p`` and ``q``."""

    __slots__ = ("p", "q")

    def __init__(self, p=0, q=0):
        self.p = Fraction(p)
        self.q = Fraction(q)

    @classmethod
    def coerce(cls, x) -> "ExactQuadratic":
        return x if isinstance(x, ExactQuadratic) else cls(x, 0)

    def __add__(self, other):
        o = ExactQuadratic.coerce(other)
        return ExactQuadratic(self.p + o.p, self.q + o.q)

    __radd__ = __add__

    def __neg__(self):
        return ExactQuadratic(-self.p, -self.q)

    def __sub__(self, other):
        return self + (-ExactQuadratic.coerce(other))

    def __rsub__(self, other):
        return ExactQuadratic.coerce(other) - self

    def __mul__(self, other):
        o = ExactQuadratic.coerce(other)
        return ExactQuadratic(self.p * o.p + 2 * self.q * o.q, self.p * o.q + self.q * o.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = ExactQuadratic.coerce(other)
        norm = o.p * o.p - 2 * o.q * o.q
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 2)")
        conj = ExactQuadratic(o.p / norm, -o.q / norm)
        return self * conj

    def sign(self) -> int:
        """Sign of ``p + q sqrt 2`` using rational comparisons only."""
        p, q = self.p, self.q
        sp = (p > 0) - (p < 0)
        sq = (q > 0) - (q < 0)
        if sq == 0:
            return sp
        if sp == 0 or sp == sq:
            return sq
        # opposite signs: compare p^2 with 2 q^2
        return sp if p * p > 2 * q * q else sq

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExactQuadratic(other)
        if not isinstance(other, ExactQuadratic):
            return NotImplemented
        return self.p == other.p and self.q == other.q

    def __lt__(self, other):
        return (self - ExactQuadratic.coerce(other)).sign() < 0

    def __hash__(self):
        return hash((self.p, self.q))

    def __float__(self):
        return float(self.p) + float(self.q) * 2 ** 0.5

    def floor_scaled(self, den: int) -> Fraction:
        """Largest multiple of ``1/den`` not exceeding the value."""
        n = self.p * den
        # initial guess is off by at most one; the loops correct it
        k = n.numerator // n.denominator + _floor_sqrt2_times(self.q * den)
        while ExactQuadratic(Fraction(k + 1, den)) <= self:
            k += 1
        while ExactQuadratic(Fraction(k, den)) > self:
            k -= 1
        return Fraction(k, den)

    def is_rational(self) -> bool:
        return self.q == 0

    def __repr__(self):
        return f"ExactQuadratic({self.p}, {self.q})"

    def __str__(self):
        if self.q == 0:
            return str(self.p)
        if self.p == 0:
            return f"{self.q}√2"
        sign = "+" if self.q > 0 else "-"
        return f"{self.p} {sign} {abs(self.q)}√2"


SQRT2 = ExactQuadratic(0, 1)


def rational_between(lo: ExactQuadratic, hi: ExactQuadratic) -> Fraction:
    """A rational strictly between ``lo < hi``."""
    lo, hi = ExactQuadratic.coerce(lo), ExactQuadratic.coerce(hi)
    if not lo < hi:
        raise ValueError("empty interval")
    den = 2
    while True:
        r = lo.floor_scaled(den) + Fraction(1, den)
        if lo < r < hi:
            return r
        den *= 2
