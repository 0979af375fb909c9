"""Exact scalars: the field Q(i, sqrt2) and Laurent polynomials in pi over it.

``QI2`` stores ``(a + b*i + c*sqrt2 + d*i*sqrt2) / den`` with integer
numerators and a positive common denominator kept in lowest terms.
``Coefficient`` is a finite sum ``sum_k x_k * pi**k`` with ``x_k`` in ``QI2``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterable, Tuple, Union

SQRT2 = math.sqrt(2.0)


def _reduce(a: int, b: int, c: int, d: int, den: int) -> Tuple[int, int, int, int, int]:
    if den < 0:
        a, b, c, d, den = -a, -b, -c, -d, -den
    g = math.gcd(math.gcd(math.gcd(a, b), math.gcd(c, d)), den)
    if g > 1:
        a, b, c, d, den = a // g, b // g, c // g, d // g, den // g
    if not (a or b or c or d):
        den = 1
    return a, b, c, d, den


class QI2:
    """Element of Q(i, sqrt2) in the basis {1, i, sqrt2, i*sqrt2}."""

    __slots__ = ("a", "b", "c", "d", "den", "_hash")

    def __init__(self, a=0, b=0, c=0, d=0, den=1):
        if den == 0:
            raise ZeroDivisionError("QI2 denominator is zero")
        if not all(isinstance(x, int) for x in (a, b, c, d, den)):
            fs = [Fraction(x) / Fraction(den) for x in (a, b, c, d)]
            den = math.lcm(*(f.denominator for f in fs))
            a, b, c, d = (int(f * den) for f in fs)
        self.a, self.b, self.c, self.d, self.den = _reduce(a, b, c, d, den)
        self._hash = None

    # constructors -----------------------------------------------------
    @classmethod
    def _raw(cls, a, b, c, d, den) -> "QI2":
        obj = object.__new__(cls)
        obj.a, obj.b, obj.c, obj.d, obj.den = _reduce(a, b, c, d, den)
        obj._hash = None
        return obj

    @classmethod
    def from_rational(cls, q) -> "QI2":
        q = Fraction(q)
        return cls._raw(q.numerator, 0, 0, 0, q.denominator)

    @classmethod
    def coerce(cls, x) -> "QI2":
        if isinstance(x, QI2):
            return x
        if isinstance(x, (int, Rational)):
            return cls.from_rational(x)
        if isinstance(x, (tuple, list)) and len(x) == 4:
            return cls.from_tuple(x)
        raise TypeError(f"cannot coerce {x!r} to QI2")

    @classmethod
    def from_tuple(cls, t: Iterable) -> "QI2":
        a, b, c, d = (Fraction(x) for x in t)
        return cls(a, b, c, d)

    # accessors --------------------------------------------------------
    def as_fractions(self) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        return tuple(Fraction(x, self.den) for x in (self.a, self.b, self.c, self.d))

    def is_zero(self) -> bool:
        return not (self.a or self.b or self.c or self.d)

    def is_rational(self) -> bool:
        return not (self.b or self.c or self.d)

    def rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return Fraction(self.a, self.den)

    def real_part(self) -> "QI2":
        return QI2._raw(self.a, 0, self.c, 0, self.den)

    def __complex__(self) -> complex:
        return complex(self.a + self.c * SQRT2, self.b + self.d * SQRT2) / self.den

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, QI2):
            try:
                other = QI2.coerce(other)
            except TypeError:
                return NotImplemented
        if self.den == other.den:
            return QI2._raw(self.a + other.a, self.b + other.b, self.c + other.c,
                            self.d + other.d, self.den)
        m, n = other.den, self.den
        return QI2._raw(self.a * m + other.a * n, self.b * m + other.b * n,
                        self.c * m + other.c * n, self.d * m + other.d * n, m * n)

    __radd__ = __add__

    def __neg__(self):
        return QI2._raw(-self.a, -self.b, -self.c, -self.d, self.den)

    def __sub__(self, other):
        if not isinstance(other, QI2):
            try:
                other = QI2.coerce(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, QI2):
            if isinstance(other, int):
                return QI2._raw(self.a * other, self.b * other, self.c * other,
                                self.d * other, self.den)
            try:
                other = QI2.coerce(other)
            except TypeError:
                return NotImplemented
        # (x1 + y1 s)(x2 + y2 s) with x, y in Q(i) and s = sqrt2
        x1r, x1i, y1r, y1i = self.a, self.b, self.c, self.d
        x2r, x2i, y2r, y2i = other.a, other.b, other.c, other.d
        xr = x1r * x2r - x1i * x2i
        xi = x1r * x2i + x1i * x2r
        yyr = y1r * y2r - y1i * y2i
        yyi = y1r * y2i + y1i * y2r
        cr = x1r * y2r - x1i * y2i + y1r * x2r - y1i * x2i
        ci = x1r * y2i + x1i * y2r + y1r * x2i + y1i * x2r
        return QI2._raw(xr + 2 * yyr, xi + 2 * yyi, cr, ci, self.den * other.den)

    __rmul__ = __mul__

    def conjugate(self) -> "QI2":
        """Complex conjugation (i -> -i, sqrt2 fixed)."""
        return QI2._raw(self.a, -self.b, self.c, -self.d, self.den)

    def sqrt2_conjugate(self) -> "QI2":
        return QI2._raw(self.a, self.b, -self.c, -self.d, self.den)

    def inverse(self) -> "QI2":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(i, sqrt2)")
        # x * conj(x) lies in Q(sqrt2); times its sqrt2-conjugate lies in Q
        n1 = self * self.conjugate()
        n2 = n1 * n1.sqrt2_conjugate()
        q = n2.rational()
        return self.conjugate() * n1.sqrt2_conjugate() * QI2.from_rational(1 / q)

    def __truediv__(self, other):
        other = QI2.coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return QI2.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = ONE_QI2
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # comparison -------------------------------------------------------
    def _key(self):
        return (self.a, self.b, self.c, self.d, self.den)

    def __eq__(self, other):
        if isinstance(other, QI2):
            return self._key() == other._key()
        if isinstance(other, (int, Rational)):
            return self._key() == QI2.from_rational(other)._key()
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"QI2({self})"

    def __str__(self):
        parts = []
        for val, unit in zip(self.as_fractions(), ("", "i", "sqrt2", "i*sqrt2")):
            if val:
                parts.append(f"{val}" if not unit else f"{val}*{unit}")
        return " + ".join(parts) if parts else "0"

    def to_json(self):
        return [str(x) for x in self.as_fractions()]


ONE_QI2 = QI2._raw(1, 0, 0, 0, 1)
ZERO_QI2 = QI2._raw(0, 0, 0, 0, 1)
I_QI2 = QI2._raw(0, 1, 0, 0, 1)
SQRT2_QI2 = QI2._raw(0, 0, 1, 0, 1)
INV_SQRT2_QI2 = QI2._raw(0, 0, 1, 0, 2)


Scalar = Union[int, Fraction, QI2, "Coefficient"]


class Coefficient:
    """Finite Laurent sum ``sum_k x_k pi**k`` with ``x_k`` in Q(i, sqrt2)."""

    __slots__ = ("parts", "_hash")

    def __init__(self, parts: Dict[int, QI2] | None = None):
        self.parts: Dict[int, QI2] = {}
        if parts:
            for k, v in parts.items():
                v = QI2.coerce(v)
                if not v.is_zero():
                    self.parts[int(k)] = v
        self._hash = None

    @classmethod
    def _raw(cls, parts: Dict[int, QI2]) -> "Coefficient":
        obj = object.__new__(cls)
        obj.parts = parts
        obj._hash = None
        return obj

    @classmethod
    def coerce(cls, x) -> "Coefficient":
        if isinstance(x, Coefficient):
            return x
        x = QI2.coerce(x)
        return cls._raw({0: x} if not x.is_zero() else {})

    @classmethod
    def pi_power(cls, k: int, value=1) -> "Coefficient":
        value = QI2.coerce(value)
        return cls._raw({k: value} if not value.is_zero() else {})

    def is_zero(self) -> bool:
        return not self.parts

    def __bool__(self):
        return bool(self.parts)

    def __add__(self, other):
        if not isinstance(other, Coefficient):
            try:
                other = Coefficient.coerce(other)
            except TypeError:
                return NotImplemented
        if not other.parts:
            return self
        if not self.parts:
            return other
        out = dict(self.parts)
        for k, v in other.parts.items():
            cur = out.get(k)
            if cur is None:
                out[k] = v
            else:
                s = cur + v
                if s.is_zero():
                    del out[k]
                else:
                    out[k] = s
        return Coefficient._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Coefficient._raw({k: -v for k, v in self.parts.items()})

    def __sub__(self, other):
        if not isinstance(other, Coefficient):
            try:
                other = Coefficient.coerce(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Coefficient):
            if len(other.parts) == 1:
                (k2, v2), = other.parts.items()
                return Coefficient._raw({k + k2: v * v2 for k, v in self.parts.items()})
            out: Dict[int, QI2] = {}
            for k1, v1 in self.parts.items():
                for k2, v2 in other.parts.items():
                    k = k1 + k2
                    p = v1 * v2
                    cur = out.get(k)
                    out[k] = p if cur is None else cur + p
            return Coefficient._raw({k: v for k, v in out.items() if not v.is_zero()})
        try:
            other = QI2.coerce(other)
        except TypeError:
            return NotImplemented
        if other.is_zero():
            return Coefficient._raw({})
        return Coefficient._raw({k: v * other for k, v in self.parts.items()})

    __rmul__ = __mul__

    def shift_pi(self, n: int) -> "Coefficient":
        """Multiply by ``pi**n``."""
        return Coefficient._raw({k + n: v for k, v in self.parts.items()})

    def conjugate(self) -> "Coefficient":
        return Coefficient._raw({k: v.conjugate() for k, v in self.parts.items()})

    def inverse(self) -> "Coefficient":
        if len(self.parts) != 1:
            raise ValueError("only single-grade coefficients are invertible")
        (k, v), = self.parts.items()
        return Coefficient._raw({-k: v.inverse()})

    def __truediv__(self, other):
        return self * Coefficient.coerce(other).inverse()

    def __pow__(self, n: int):
        result = ONE
        base = self if n >= 0 else self.inverse()
        n = abs(n)
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def field_value(self) -> QI2:
        """The value when the coefficient carries no power of pi."""
        if not self.parts:
            return ZERO_QI2
        if set(self.parts) != {0}:
            raise ValueError(f"{self} is not pi-free")
        return self.parts[0]

    def __complex__(self):
        return complex(sum(complex(v) * math.pi ** k for k, v in self.parts.items()))

    def __eq__(self, other):
        if isinstance(other, Coefficient):
            return self.parts == other.parts
        try:
            return self.parts == Coefficient.coerce(other).parts
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.parts.items()))
        return self._hash

    def __repr__(self):
        return f"Coefficient({self})"

    def __str__(self):
        if not self.parts:
            return "0"
        terms = []
        for k in sorted(self.parts):
            v = self.parts[k]
            fac = "" if k == 0 else (f"*pi^{k}")
            terms.append(f"({v}){fac}")
        return " + ".join(terms)

    def to_json(self):
        return {str(k): v.to_json() for k, v in sorted(self.parts.items())}

    @classmethod
    def from_json(cls, obj) -> "Coefficient":
        return cls({int(k): QI2.from_tuple(v) for k, v in obj.items()})


ONE = Coefficient._raw({0: ONE_QI2})
ZERO = Coefficient._raw({})
PI = Coefficient._raw({1: ONE_QI2})
INV_PI = Coefficient._raw({-1: ONE_QI2})
I_UNIT = Coefficient._raw({0: I_QI2})
