"""Exact complex rationals (Gaussian rationals)."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

__all__ = ["QI", "as_qi", "I"]


class QI:
    """A complex number ``re + im*i`` with :class:`~fractions.Fraction` parts.

    Floats are rejected on purpose: every coefficient that enters the algebra
    must be exact.
    """

    __slots__ = ("re", "im", "_hash")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)
        self._hash = None

    # -- construction helpers -------------------------------------------------
    @staticmethod
    def parse(text: str) -> "QI":
        """Inverse of :meth:`__str__` (``"a/b"``, ``"a/b + c/d*i"``, ``"c/d*i"``)."""
        s = text.replace(" ", "")
        if not s.endswith("*i"):
            return QI(Fraction(s))
        body = s[:-2]
        # split at the last sign that is not the leading one
        for k in range(len(body) - 1, 0, -1):
            if body[k] in "+-":
                return QI(Fraction(body[:k]), Fraction(body[k:]))
        return QI(0, Fraction(body))

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = as_qi(other)
        if o is NotImplemented:
            return NotImplemented
        return QI(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = as_qi(other)
        if o is NotImplemented:
            return NotImplemented
        return QI(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = as_qi(other)
        if o is NotImplemented:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = as_qi(other)
        if o is NotImplemented:
            return NotImplemented
        if o.im == 0:
            return QI(self.re * o.re, self.im * o.re)
        return QI(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = as_qi(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = as_qi(other)
        if o is NotImplemented:
            return NotImplemented
        return o * self.inverse()

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out = QI(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def inverse(self) -> "QI":
        den = self.re * self.re + self.im * self.im
        if den == 0:
            raise ZeroDivisionError("QI division by zero")
        return QI(self.re / den, -self.im / den)

    def conjugate(self) -> "QI":
        return QI(self.re, -self.im)

    # -- predicates / conversion ---------------------------------------------
    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return self.im == 0

    def __eq__(self, other):
        o = as_qi(other)
        if o is NotImplemented:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.re, self.im)) if self.im else hash(self.re)
        return self._hash

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"QI({self})"

    def __str__(self):
        if self.im == 0:
            return _fs(self.re)
        if self.re == 0:
            return f"{_fs(self.im)}*i"
        sign = "+" if self.im > 0 else "-"
        return f"{_fs(self.re)} {sign} {_fs(abs(self.im))}*i"


def _fs(f: Fraction) -> str:
    return str(f)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"exact rational required, got {type(x).__name__}")


def as_qi(x):
    """Coerce ints, Fractions and QI; anything else yields ``NotImplemented``."""
    if isinstance(x, QI):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return QI(x)
    if isinstance(x, bool):
        return QI(int(x))
    return NotImplemented


I = QI(0, 1)
