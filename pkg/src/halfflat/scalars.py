"""Scalar types that the generic tensor algebra runs over besides ``Expr``.

``QuadNumber`` is exact arithmetic in Q(sqrt r) with the root kept formal,
so zero means both rational parts vanish.  ``DegreeBound`` propagates upper
bounds on numerator/denominator degrees through the same algebra; it feeds
the Schwartz-Zippel failure-probability bound reported in sampled mode.
"""

from __future__ import annotations

from fractions import Fraction

from gmpy2 import mpq


def _q(x):
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


class QuadNumber:
    __slots__ = ("a", "b", "r")

    def __init__(self, a, b, r):
        self.a = _q(a)
        self.b = _q(b)
        self.r = _q(r)

    def _lift(self, o):
        if isinstance(o, QuadNumber):
            if o.r != self.r and o.b and self.b:
                raise ValueError("mixing different radicands")
            return o
        return QuadNumber(o, 0, self.r)

    def __add__(self, o):
        o = self._lift(o)
        return QuadNumber(self.a + o.a, self.b + o.b, self.r)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._lift(o)
        return QuadNumber(self.a - o.a, self.b - o.b, self.r)

    def __rsub__(self, o):
        return self._lift(o) - self

    def __neg__(self):
        return QuadNumber(-self.a, -self.b, self.r)

    def __mul__(self, o):
        if not isinstance(o, QuadNumber):
            o = _q(o)
            return QuadNumber(self.a * o, self.b * o, self.r)
        return QuadNumber(self.a * o.a + self.b * o.b * self.r, self.a * o.b + self.b * o.a, self.r)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if not isinstance(o, QuadNumber):
            o = _q(o)
            return QuadNumber(self.a / o, self.b / o, self.r)
        n = o.a * o.a - o.b * o.b * self.r
        if not n:
            raise ZeroDivisionError("norm of divisor vanishes")
        conj = QuadNumber(o.a / n, -o.b / n, self.r)
        return self * conj

    def __rtruediv__(self, o):
        return self._lift(o) / self

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __eq__(self, o):
        o = self._lift(o)
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b, self.r))

    def __repr__(self):
        return f"({self.a} + {self.b}*sqrt({self.r}))"

    def as_pair(self):
        return (Fraction(int(self.a.numerator), int(self.a.denominator)),
                Fraction(int(self.b.numerator), int(self.b.denominator)))


class DegreeBound:
    """Upper bound on numerator degree over a tracked denominator.

    A value is ``N / L`` with ``deg N <= n`` and ``L`` a product of opaque
    factors ``{key: (degree, exponent)}``.  Sums take the lcm of
    denominators rather than their product, which keeps the bound close to
    the true degree through long chains of additions.
    """

    __slots__ = ("n", "den")

    def __init__(self, n: int, den=None):
        self.n = n
        self.den = den or {}

    @staticmethod
    def _lift(o):
        return o if isinstance(o, DegreeBound) else DegreeBound(0)

    @property
    def d(self) -> int:
        return sum(deg * e for deg, e in self.den.values())

    def __add__(self, o):
        o = self._lift(o)
        den = dict(self.den)
        for k, (deg, e) in o.den.items():
            if k not in den or den[k][1] < e:
                den[k] = (deg, e)
        total = sum(deg * e for deg, e in den.values())
        return DegreeBound(max(self.n + total - self.d, o.n + total - o.d), den)

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __neg__(self):
        return self

    def __mul__(self, o):
        o = self._lift(o)
        den = dict(self.den)
        for k, (deg, e) in o.den.items():
            den[k] = (deg, den[k][1] + e) if k in den else (deg, e)
        return DegreeBound(self.n + o.n, den)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._lift(o)
        if not o.n and not o.den:
            return self
        inv = DegreeBound(o.d, {("inv", id(o)): (o.n, 1)})
        return self * inv

    def __rtruediv__(self, o):
        return self._lift(o) / self

    def __bool__(self):
        return True

    def __repr__(self):
        return f"DegreeBound({self.n}, {self.d})"
