"""Polynomial-times-Gaussian functions of several complex variables.

A :class:`PolyGaussian` on ``n`` complex variables ``z_0 .. z_{n-1}`` is

    sum over monomials  coef * prod_j conj(z_j)**a_j * z_j**b_j
        * prod_j exp(-pi * c_j * |z_j|**2)

Monomials are stored as flat exponent tuples ``(a_0, b_0, a_1, b_1, ...)``.
In exact mode coefficients are :class:`~kmlab.field.Coefficient` and the
scales ``c_j`` are :class:`~kmlab.field.QI2`; in numeric mode both are
Python complex numbers.  Values are immutable; every operation returns a new
object.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from .errors import (NonIntegrable, NotUnitary, ScaleMismatch, UnsupportedScale,
                     ZeroScale)
from .field import (I_QI2, INV_PI, ONE, ONE_QI2, PI, ZERO, Coefficient, QI2)

Monomial = Tuple[int, ...]


def _real_part(c) -> float:
    return complex(c).real


@lru_cache(maxsize=None)
def _binomial_row(n: int) -> Tuple[int, ...]:
    return tuple(math.comb(n, r) for r in range(n + 1))


class PolyGaussian:
    __slots__ = ("num_vars", "scales", "terms", "exact", "_hash")

    def __init__(self, num_vars: int, scales=None, terms: Mapping | None = None,
                 exact: bool = True, _trusted: bool = False):
        self.num_vars = int(num_vars)
        self.exact = bool(exact)
        if scales is None:
            scales = [1] * self.num_vars
        if exact:
            scales = tuple(QI2.coerce(c) for c in scales)
        else:
            scales = tuple(complex(c) for c in scales)
        if len(scales) != self.num_vars:
            raise ValueError("one scale per variable is required")
        for c in scales:
            if _real_part(c) <= 0:
                raise NonIntegrable(f"Gaussian scale {c} has non-positive real part")
        self.scales = scales
        if _trusted:
            self.terms = dict(terms) if terms else {}
        else:
            clean: Dict[Monomial, object] = {}
            for mono, coef in (terms or {}).items():
                mono = tuple(int(e) for e in mono)
                if len(mono) != 2 * self.num_vars or min(mono, default=0) < 0:
                    raise ValueError(f"bad monomial {mono} for {self.num_vars} variables")
                coef = Coefficient.coerce(coef) if exact else complex(coef)
                if _nonzero(coef):
                    prev = clean.get(mono)
                    if prev is not None:
                        coef = prev + coef
                        if not _nonzero(coef):
                            del clean[mono]
                            continue
                    clean[mono] = coef
            self.terms = clean
        self._hash = None

    # construction helpers ---------------------------------------------
    @classmethod
    def gaussian(cls, num_vars: int, scales=None, exact: bool = True) -> "PolyGaussian":
        """The Gaussian with the given scales (the standard one when omitted)."""
        one = ONE if exact else 1.0 + 0j
        return cls(num_vars, scales, {(0,) * (2 * num_vars): one}, exact, _trusted=True)

    @classmethod
    def monomial(cls, num_vars: int, exps: Sequence[int], coef=1, scales=None,
                 exact: bool = True) -> "PolyGaussian":
        return cls(num_vars, scales, {tuple(exps): coef}, exact)

    @classmethod
    def variable(cls, num_vars: int, j: int, conjugated: bool = False,
                 exact: bool = True) -> "PolyGaussian":
        exps = [0] * (2 * num_vars)
        exps[2 * j + (0 if conjugated else 1)] = 1
        return cls.monomial(num_vars, exps, 1, exact=exact)

    def _new(self, terms, scales=None, num_vars=None) -> "PolyGaussian":
        return PolyGaussian(self.num_vars if num_vars is None else num_vars,
                            self.scales if scales is None else scales,
                            terms, self.exact, _trusted=True)

    def zero(self) -> "PolyGaussian":
        return self._new({})

    # scalar helpers ---------------------------------------------------
    def _pi(self):
        return PI if self.exact else math.pi

    def _one(self):
        return ONE if self.exact else 1.0 + 0j

    def _scalar(self, x):
        if self.exact:
            return Coefficient.coerce(x)
        return complex(x)

    def _scale_coef(self, j: int):
        c = self.scales[j]
        return Coefficient.coerce(c) if self.exact else c

    # basic protocol ---------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def sorted_terms(self) -> List[Tuple[Monomial, object]]:
        return sorted(self.terms.items())

    def __eq__(self, other):
        if not isinstance(other, PolyGaussian):
            return NotImplemented
        if self.num_vars != other.num_vars or self.exact != other.exact:
            return False
        if not self.terms and not other.terms:
            return True
        return self.scales == other.scales and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num_vars, self.scales, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        if not self.terms:
            return f"PolyGaussian(0, n={self.num_vars})"
        body = " + ".join(f"[{coef}]*{_mono_str(m)}" for m, coef in self.sorted_terms()[:8])
        more = "" if len(self.terms) <= 8 else f" + ... ({len(self.terms)} terms)"
        return f"PolyGaussian({body}{more}; scales={[str(c) for c in self.scales]})"

    # ring operations ----------------------------------------------------
    def _check_compatible(self, other: "PolyGaussian"):
        if self.num_vars != other.num_vars:
            raise ScaleMismatch("different numbers of variables")
        if self.exact != other.exact:
            raise ScaleMismatch("cannot mix exact and numeric PolyGaussians")
        if self.scales != other.scales and self.terms and other.terms:
            raise ScaleMismatch(f"scales differ: {self.scales} vs {other.scales}")

    def __add__(self, other):
        if not isinstance(other, PolyGaussian):
            return NotImplemented
        self._check_compatible(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for mono, coef in other.terms.items():
            cur = out.get(mono)
            if cur is None:
                out[mono] = coef
            else:
                s = cur + coef
                if _nonzero(s):
                    out[mono] = s
                else:
                    del out[mono]
        return self._new(out)

    def __neg__(self):
        return self._new({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, PolyGaussian):
            return NotImplemented
        return self + (-other)

    def scale_by(self, x) -> "PolyGaussian":
        x = self._scalar(x)
        if not _nonzero(x):
            return self.zero()
        return self._new({m: c * x for m, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, PolyGaussian):
            return pointwise_product(self, other)
        try:
            return self.scale_by(other)
        except TypeError:
            return NotImplemented

    __rmul__ = __mul__

    def to_numeric(self) -> "PolyGaussian":
        if not self.exact:
            return self
        return PolyGaussian(self.num_vars, [complex(c) for c in self.scales],
                            {m: complex(c) for m, c in self.terms.items()}, exact=False,
                            _trusted=True)

    def evaluate(self, point: Sequence[complex]) -> complex:
        """Numeric value at ``point`` (one complex number per variable)."""
        z = [complex(v) for v in point]
        if len(z) != self.num_vars:
            raise ValueError("point has the wrong dimension")
        gauss = 1.0 + 0j
        for zj, c in zip(z, self.scales):
            gauss *= cmath.exp(-math.pi * complex(c) * abs(zj) ** 2)
        total = 0j
        for mono, coef in self.terms.items():
            val = complex(coef)
            for j in range(self.num_vars):
                a, b = mono[2 * j], mono[2 * j + 1]
                if a:
                    val *= zj_conj_pow(z[j], a)
                if b:
                    val *= z[j] ** b
            total += val
        return total * gauss

    def polynomial_degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    # serialization ----------------------------------------------------
    def to_json(self) -> dict:
        if self.exact:
            scales = [c.to_json() for c in self.scales]
            terms = [[list(m), c.to_json()] for m, c in self.sorted_terms()]
        else:
            scales = [[c.real, c.imag] for c in self.scales]
            terms = [[list(m), [c.real, c.imag]] for m, c in self.sorted_terms()]
        return {"num_vars": self.num_vars, "exact": self.exact, "scales": scales,
                "terms": terms}

    @classmethod
    def from_json(cls, obj: dict) -> "PolyGaussian":
        exact = obj.get("exact", True)
        n = obj["num_vars"]
        if exact:
            scales = [QI2.from_tuple(s) for s in obj["scales"]]
            terms = {tuple(m): Coefficient.from_json(c) for m, c in obj["terms"]}
        else:
            scales = [complex(*s) for s in obj["scales"]]
            terms = {tuple(m): complex(*c) for m, c in obj["terms"]}
        return cls(n, scales, terms, exact)


def zj_conj_pow(z: complex, a: int) -> complex:
    return z.conjugate() ** a


def _nonzero(c) -> bool:
    if isinstance(c, Coefficient):
        return not c.is_zero()
    return c != 0


def _mono_str(m: Monomial) -> str:
    out = []
    for j in range(len(m) // 2):
        a, b = m[2 * j], m[2 * j + 1]
        if a:
            out.append(f"zb{j}^{a}")
        if b:
            out.append(f"z{j}^{b}")
    return "*".join(out) if out else "1"


# ---------------------------------------------------------------------------
# module-level operations


def add(f: PolyGaussian, g: PolyGaussian) -> PolyGaussian:
    return f + g


def mul_poly(f: PolyGaussian, exps: Sequence[int], coef=1) -> PolyGaussian:
    """Multiply ``f`` by ``coef * monomial(exps)``; scales are untouched."""
    exps = tuple(exps)
    if len(exps) != 2 * f.num_vars:
        raise ValueError("monomial has the wrong number of exponents")
    coef = f._scalar(coef)
    if not _nonzero(coef):
        return f.zero()
    out = {}
    for mono, c in f.terms.items():
        out[tuple(x + y for x, y in zip(mono, exps))] = c * coef
    return f._new(out)


def pointwise_product(f: PolyGaussian, g: PolyGaussian) -> PolyGaussian:
    """Product of two functions on the same variables (Gaussian scales add)."""
    if f.num_vars != g.num_vars or f.exact != g.exact:
        raise ScaleMismatch("pointwise product needs matching variables and mode")
    scales = [a + b for a, b in zip(f.scales, g.scales)]
    out: Dict[Monomial, object] = {}
    for m1, c1 in f.terms.items():
        for m2, c2 in g.terms.items():
            m = tuple(x + y for x, y in zip(m1, m2))
            p = c1 * c2
            cur = out.get(m)
            out[m] = p if cur is None else cur + p
    return PolyGaussian(f.num_vars, scales, {m: c for m, c in out.items() if _nonzero(c)},
                        f.exact, _trusted=True)


def tensor(f: PolyGaussian, g: PolyGaussian) -> PolyGaussian:
    """``f(x) * g(y)`` on the concatenated variable list ``(x, y)``."""
    if f.exact != g.exact:
        raise ScaleMismatch("cannot mix exact and numeric PolyGaussians")
    out = {}
    for m1, c1 in f.terms.items():
        for m2, c2 in g.terms.items():
            out[m1 + m2] = c1 * c2
    return PolyGaussian(f.num_vars + g.num_vars, f.scales + g.scales, out, f.exact,
                        _trusted=True)


def tensor_power(f: PolyGaussian, n: int) -> PolyGaussian:
    out = f
    for _ in range(n - 1):
        out = tensor(out, f)
    return out


def _check_index(f: PolyGaussian, j: int):
    if not 0 <= j < f.num_vars:
        raise IndexError(f"variable index {j} out of range for {f.num_vars} variables")


def derivative(f: PolyGaussian, j: int, conjugated: bool = False) -> PolyGaussian:
    """d/dz_j (or d/dconj(z_j) when ``conjugated``), Gaussian factor included."""
    _check_index(f, j)
    pos_same = 2 * j + (0 if conjugated else 1)   # exponent lowered by the derivative
    pos_other = 2 * j + (1 if conjugated else 0)  # exponent raised by the Gaussian
    gauss = -(f._pi() * f._scale_coef(j))
    out: Dict[Monomial, object] = {}
    for mono, coef in f.terms.items():
        e = mono[pos_same]
        if e:
            m = list(mono)
            m[pos_same] -= 1
            m = tuple(m)
            _accumulate(out, m, coef * e)
        m = list(mono)
        m[pos_other] += 1
        _accumulate(out, tuple(m), coef * gauss)
    return f._new({m: c for m, c in out.items() if _nonzero(c)})


def poly_derivative(f: PolyGaussian, j: int, conjugated: bool = False) -> PolyGaussian:
    """Derivative of the polynomial part only (the Gaussian factor is ignored)."""
    _check_index(f, j)
    pos = 2 * j + (0 if conjugated else 1)
    out: Dict[Monomial, object] = {}
    for mono, coef in f.terms.items():
        e = mono[pos]
        if e:
            m = list(mono)
            m[pos] -= 1
            _accumulate(out, tuple(m), coef * e)
    return f._new({m: c for m, c in out.items() if _nonzero(c)})


def _accumulate(out: Dict, mono: Monomial, coef):
    cur = out.get(mono)
    out[mono] = coef if cur is None else cur + coef


def apply_D(f: PolyGaussian, j: int, conjugated: bool = False) -> PolyGaussian:
    """``(z_j - (1/pi) d/dconj(z_j)) f``, or the barred operator when ``conjugated``.

    Only defined against the standard Gaussian: the scale of ``z_j`` must be 1.
    """
    _check_index(f, j)
    if f.scales[j] != (ONE_QI2 if f.exact else 1):
        raise UnsupportedScale(f"D operators need scale 1 on variable {j}, got {f.scales[j]}")
    # On scale 1 the Gaussian part of the derivative cancels half of the
    # multiplication, leaving 2*z*(term) - (1/pi)*(polynomial derivative).
    mult = 2 * j + (0 if conjugated else 1)
    lower = 2 * j + (1 if conjugated else 0)
    inv_pi = INV_PI if f.exact else 1 / math.pi
    out: Dict[Monomial, object] = {}
    for mono, coef in f.terms.items():
        m = list(mono)
        m[mult] += 1
        _accumulate(out, tuple(m), coef * 2)
        e = mono[lower]
        if e:
            m = list(mono)
            m[lower] -= 1
            _accumulate(out, tuple(m), -(coef * inv_pi) * e)
    return f._new({m: c for m, c in out.items() if _nonzero(c)})


def _moment_factor(f: PolyGaussian, j: int, a: int):
    """Integral over C of |z|^(2a) exp(-pi c |z|^2) with c the scale of z_j."""
    c = f.scales[j]
    if f.exact:
        return Coefficient.pi_power(-a, QI2.from_rational(math.factorial(a)) * c.inverse() ** (a + 1))
    return math.factorial(a) / (c ** (a + 1) * math.pi ** a)


def integrate(f: PolyGaussian, j: int) -> PolyGaussian:
    """Integrate out variable ``j`` over C with Lebesgue measure."""
    _check_index(f, j)
    if _real_part(f.scales[j]) <= 0:
        raise NonIntegrable(f"scale {f.scales[j]} is not integrable")
    cache: Dict[int, object] = {}
    out: Dict[Monomial, object] = {}
    for mono, coef in f.terms.items():
        a, b = mono[2 * j], mono[2 * j + 1]
        if a != b:
            continue
        if a not in cache:
            cache[a] = _moment_factor(f, j, a)
        m = mono[:2 * j] + mono[2 * j + 2:]
        _accumulate(out, m, coef * cache[a])
    scales = f.scales[:j] + f.scales[j + 1:]
    return PolyGaussian(f.num_vars - 1, scales, {m: c for m, c in out.items() if _nonzero(c)},
                        f.exact, _trusted=True)


def moment_integral(f: PolyGaussian):
    """Integral over C of a one-variable PolyGaussian (its own Gaussian included)."""
    if f.num_vars != 1:
        raise ValueError("moment_integral needs a one-variable PolyGaussian")
    g = integrate(f, 0)
    return g.terms.get((), ZERO if f.exact else 0j)


def integrate_all(f: PolyGaussian):
    g = f
    while g.num_vars:
        g = integrate(g, g.num_vars - 1)
    return g.terms.get((), ZERO if f.exact else 0j)


def _field_value(f: PolyGaussian, x):
    if f.exact:
        if isinstance(x, Coefficient):
            return x.field_value()
        return QI2.coerce(x)
    return complex(x)


def rescale(f: PolyGaussian, j: int, lam) -> PolyGaussian:
    """Substitute ``z_j -> lam * z_j``."""
    _check_index(f, j)
    lam = _field_value(f, lam)
    if (lam.is_zero() if f.exact else lam == 0):
        raise ZeroScale("rescaling by zero")
    lam_bar = lam.conjugate()
    abs2 = lam * lam_bar
    if f.exact:
        abs2 = abs2.real_part()
    else:
        abs2 = complex(abs(lam) ** 2)
    pow_cache: Dict[Tuple[int, int], object] = {}
    out = {}
    for mono, coef in f.terms.items():
        a, b = mono[2 * j], mono[2 * j + 1]
        key = (a, b)
        if key not in pow_cache:
            pow_cache[key] = lam_bar ** a * lam ** b
        fac = pow_cache[key]
        out[mono] = coef * fac
    scales = list(f.scales)
    scales[j] = scales[j] * abs2
    return PolyGaussian(f.num_vars, scales, {m: c for m, c in out.items() if _nonzero(c)},
                        f.exact, _trusted=True)


def mul_gaussian(f: PolyGaussian, j: int, c) -> PolyGaussian:
    """Multiply by ``exp(-pi c |z_j|^2)``."""
    _check_index(f, j)
    c = _field_value(f, c)
    scales = list(f.scales)
    scales[j] = scales[j] + c
    return PolyGaussian(f.num_vars, scales, f.terms, f.exact, _trusted=True)


def restrict_zero(f: PolyGaussian, indices: Iterable[int]) -> PolyGaussian:
    """Set the listed variables to 0 and drop them from the variable list."""
    idx = sorted(set(indices))
    for j in idx:
        _check_index(f, j)
    keep = [j for j in range(f.num_vars) if j not in set(idx)]
    out = {}
    for mono, coef in f.terms.items():
        if any(mono[2 * j] or mono[2 * j + 1] for j in idx):
            continue
        m = tuple(e for j in keep for e in (mono[2 * j], mono[2 * j + 1]))
        out[m] = coef
    return PolyGaussian(len(keep), [f.scales[j] for j in keep], out, f.exact, _trusted=True)


def _is_unitary(U, exact: bool) -> bool:
    (u00, u01), (u10, u11) = U
    if exact:
        cols = ((u00, u10), (u01, u11))
        for p in range(2):
            for q in range(2):
                s = cols[p][0].conjugate() * cols[q][0] + cols[p][1].conjugate() * cols[q][1]
                if s != (1 if p == q else 0):
                    return False
        return True
    import numpy as np
    M = np.array([[u00, u01], [u10, u11]], dtype=complex)
    return bool(np.allclose(M.conj().T @ M, np.eye(2), atol=1e-12))


def _linear_power(alpha, beta, n: int, one) -> List[Tuple[int, object]]:
    """(alpha*x + beta*y)^n as a list of (power of x, coefficient); y gets n - r."""
    row = _binomial_row(n)
    out = []
    for r in range(n + 1):
        c = one * row[r]
        if r:
            c = c * alpha ** r
        if n - r:
            c = c * beta ** (n - r)
        if (not c.is_zero()) if isinstance(c, QI2) else c != 0:
            out.append((r, c))
    return out


def linear_substitution(f: PolyGaussian, pairs: Sequence[Tuple[int, int]], U) -> PolyGaussian:
    """Replace each pair ``(z_j, z_k)`` by ``U @ (w_j, w_k)``.

    ``U`` is a 2x2 unitary matrix (rows of field elements); the Gaussian is
    invariant, so only the polynomial part is re-expanded.
    """
    if f.exact:
        U = [[QI2.coerce(x) for x in row] for row in U]
        one = ONE_QI2
    else:
        U = [[complex(x) for x in row] for row in U]
        one = 1.0 + 0j
    if not _is_unitary(U, f.exact):
        raise NotUnitary(f"matrix {U} is not unitary")
    (u00, u01), (u10, u11) = U
    cu00, cu01, cu10, cu11 = (x.conjugate() for x in (u00, u01, u10, u11))
    g = f
    for j, k in pairs:
        _check_index(g, j)
        _check_index(g, k)
        if g.scales[j] != g.scales[k]:
            raise ScaleMismatch(f"variables {j} and {k} have different scales")
        cache: Dict[Tuple[str, int], List] = {}

        def expand(which: str, n: int):
            key = (which, n)
            if key not in cache:
                alpha, beta = {"zj": (u00, u01), "zk": (u10, u11),
                               "bj": (cu00, cu01), "bk": (cu10, cu11)}[which]
                cache[key] = _linear_power(alpha, beta, n, one)
            return cache[key]

        out: Dict[Monomial, object] = {}
        for mono, coef in g.terms.items():
            aj, bj, ak, bk = mono[2 * j], mono[2 * j + 1], mono[2 * k], mono[2 * k + 1]
            # conj(z_j)^aj z_j^bj conj(z_k)^ak z_k^bk in terms of w_j, w_k
            partial = {(0, 0, 0, 0): one}
            for which, n, slot in (("bj", aj, 0), ("zj", bj, 1), ("bk", ak, 0), ("zk", bk, 1)):
                if not n:
                    continue
                nxt: Dict[Tuple[int, int, int, int], object] = {}
                for key, c in partial.items():
                    for r, c2 in expand(which, n):
                        e = list(key)
                        e[slot] += r          # power of w_j (or its conjugate)
                        e[2 + slot] += n - r  # power of w_k (or its conjugate)
                        e = tuple(e)
                        p = c * c2
                        cur = nxt.get(e)
                        nxt[e] = p if cur is None else cur + p
                partial = nxt
            for (wja, wjb, wka, wkb), c in partial.items():
                m = list(mono)
                m[2 * j], m[2 * j + 1], m[2 * k], m[2 * k + 1] = wja, wjb, wka, wkb
                _accumulate(out, tuple(m), coef * c)
        g = g._new({m: c for m, c in out.items() if _nonzero(c)})
    return g


@lru_cache(maxsize=None)
def _fourier_monomial_exact(a: int, b: int) -> PolyGaussian:
    """Transform of conj(z)^a z^b exp(-pi |z|^2) in one variable (exact, scale 1)."""
    g = PolyGaussian.gaussian(1)
    for _ in range(a):
        g = derivative(g, 0, conjugated=False)
    for _ in range(b):
        g = derivative(g, 0, conjugated=True)
    phase = Coefficient.pi_power(-(a + b), I_QI2 ** (a + b))
    return g.scale_by(phase)


def _fourier_monomial_numeric(a: int, b: int, c: complex) -> PolyGaussian:
    g = PolyGaussian(1, [1 / c], {(0, 0): 1 / c}, exact=False)
    for _ in range(a):
        g = derivative(g, 0, conjugated=False)
    for _ in range(b):
        g = derivative(g, 0, conjugated=True)
    return g.scale_by((1j / math.pi) ** (a + b))


def fourier_transform(f: PolyGaussian, j: int) -> PolyGaussian:
    """Fourier transform in variable ``j``.

    Kernel ``exp(-2 pi i Re(y * conj(x)))`` against Lebesgue measure on C, so
    the standard Gaussian is fixed and applying the transform twice gives
    ``f(-z_j)``.  Multiplication by ``z`` becomes ``(i/pi) d/dconj(z)`` and
    multiplication by ``conj(z)`` becomes ``(i/pi) d/dz``.
    """
    _check_index(f, j)
    c = f.scales[j]
    if f.exact and c != ONE_QI2:
        raise UnsupportedScale("exact Fourier transform is only available at scale 1")
    cache: Dict[Tuple[int, int], PolyGaussian] = {}
    out: Dict[Monomial, object] = {}
    new_scale = None
    for mono, coef in f.terms.items():
        a, b = mono[2 * j], mono[2 * j + 1]
        if (a, b) not in cache:
            cache[(a, b)] = (_fourier_monomial_exact(a, b) if f.exact
                             else _fourier_monomial_numeric(a, b, c))
        piece = cache[(a, b)]
        new_scale = piece.scales[0]
        for (pa, pb), pc in piece.terms.items():
            m = list(mono)
            m[2 * j], m[2 * j + 1] = pa, pb
            _accumulate(out, tuple(m), coef * pc)
    scales = list(f.scales)
    scales[j] = new_scale if new_scale is not None else (ONE_QI2 if f.exact else 1 / c)
    return PolyGaussian(f.num_vars, scales, {m: c2 for m, c2 in out.items() if _nonzero(c2)},
                        f.exact, _trusted=True)


def parity(f: PolyGaussian, indices: Iterable[int] | None = None) -> PolyGaussian:
    """``f(-z)`` on the listed variables (all of them by default)."""
    idx = range(f.num_vars) if indices is None else list(indices)
    out = {}
    for mono, coef in f.terms.items():
        deg = sum(mono[2 * j] + mono[2 * j + 1] for j in idx)
        out[mono] = -coef if deg % 2 else coef
    return f._new(out)


def mu_gap(f: PolyGaussian, j: int = 0) -> Tuple[int, int]:
    """(min, max) over stored monomials of (z-exponent minus conj(z)-exponent)."""
    gaps = [m[2 * j + 1] - m[2 * j] for m in f.terms]
    if not gaps:
        raise ValueError("mu gap of the zero function is undefined")
    return min(gaps), max(gaps)


def radial_substitute(f: PolyGaussian, j: int, t) -> PolyGaussian:
    """Replace ``|z_j|^2`` by ``t |z_j|^2`` in a polynomial part made of |z_j|^(2a).

    ``t`` may carry powers of pi (it is a Coefficient in exact mode); the
    Gaussian scale is left untouched, so this acts on the polynomial only.
    """
    t = f._scalar(t)
    out = {}
    for mono, coef in f.terms.items():
        a, b = mono[2 * j], mono[2 * j + 1]
        if a != b:
            raise ValueError("radial substitution needs monomials balanced in z_j")
        out[mono] = coef * (t ** a) if a else coef
    return f._new({m: c for m, c in out.items() if _nonzero(c)})


def as_fraction(x) -> Fraction:
    """Rational value of an exact coefficient with no pi and no irrational part."""
    return Coefficient.coerce(x).field_value().rational()


def _mat_inverse_exact(M: List[List[QI2]]) -> List[List[QI2]]:
    n = len(M)
    aug = [list(row) + [ONE_QI2 if i == j else QI2(0) for j in range(n)]
           for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not aug[r][col].is_zero()), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = aug[col][col].inverse()
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and not aug[r][col].is_zero():
                fac = aug[r][col]
                aug[r] = [x - fac * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def cayley_unitary(S) -> List[List[QI2]]:
    """``(I - S)(I + S)^-1`` for a skew-hermitian matrix ``S`` over Q(i, sqrt2).

    The result is exactly unitary, which makes it a convenient source of
    random unitary matrices with exact entries.
    """
    S = [[QI2.coerce(x) for x in row] for row in S]
    n = len(S)
    for i in range(n):
        for j in range(n):
            if S[i][j] != -S[j][i].conjugate():
                raise ValueError("matrix is not skew-hermitian")
    eye = [[ONE_QI2 if i == j else QI2(0) for j in range(n)] for i in range(n)]
    minus = [[eye[i][j] - S[i][j] for j in range(n)] for i in range(n)]
    plus_inv = _mat_inverse_exact([[eye[i][j] + S[i][j] for j in range(n)] for i in range(n)])
    return [[sum((minus[i][k] * plus_inv[k][j] for k in range(n)), QI2(0))
             for j in range(n)] for i in range(n)]


def is_unitary_matrix(U, exact: bool = True) -> bool:
    n = len(U)
    if exact:
        for p in range(n):
            for q in range(n):
                s = sum((U[i][p].conjugate() * U[i][q] for i in range(n)), QI2(0))
                if s != (ONE_QI2 if p == q else QI2(0)):
                    return False
        return True
    import numpy as np
    M = np.array(U, dtype=complex)
    return bool(np.allclose(M.conj().T @ M, np.eye(n), atol=1e-12))


def unitary_substitution(f: PolyGaussian, indices: Sequence[int], U) -> PolyGaussian:
    """Substitute ``z_indices = U @ w_indices`` for an n x n unitary ``U``.

    The variables in ``indices`` must share one scale so that the Gaussian is
    unchanged.
    """
    idx = list(indices)
    n = len(idx)
    if f.exact:
        U = [[QI2.coerce(x) for x in row] for row in U]
        one = ONE_QI2
    else:
        U = [[complex(x) for x in row] for row in U]
        one = 1.0 + 0j
    if len(U) != n or any(len(row) != n for row in U) or not is_unitary_matrix(U, f.exact):
        raise NotUnitary("substitution matrix is not unitary")
    for j in idx:
        _check_index(f, j)
    if len({f.scales[j] for j in idx}) > 1:
        raise ScaleMismatch("unitary substitution needs equal scales on its variables")

    # local polynomials in (w, conj w) keyed by 2n-exponent tuples
    def poly_mul(p1, p2):
        out = {}
        for m1, c1 in p1.items():
            for m2, c2 in p2.items():
                m = tuple(x + y for x, y in zip(m1, m2))
                _accumulate(out, m, c1 * c2)
        return {m: c for m, c in out.items()
                if (not c.is_zero() if isinstance(c, QI2) else c != 0)}

    zero_key = (0,) * (2 * n)
    linear = {}
    for i in range(n):
        for conj in (0, 1):
            form = {}
            for l in range(n):
                c = U[i][l].conjugate() if conj else U[i][l]
                if (not c.is_zero()) if isinstance(c, QI2) else c != 0:
                    key = [0] * (2 * n)
                    key[2 * l + (0 if conj else 1)] = 1
                    form[tuple(key)] = c
            linear[(i, conj)] = form
    powers: Dict[Tuple[int, int, int], Dict] = {}

    def power(i, conj, e):
        key = (i, conj, e)
        if key not in powers:
            powers[key] = {zero_key: one} if e == 0 else poly_mul(power(i, conj, e - 1),
                                                                   linear[(i, conj)])
        return powers[key]

    out: Dict[Monomial, object] = {}
    for mono, coef in f.terms.items():
        local = {zero_key: one}
        for pos, j in enumerate(idx):
            a, b = mono[2 * j], mono[2 * j + 1]
            if a:
                local = poly_mul(local, power(pos, 1, a))
            if b:
                local = poly_mul(local, power(pos, 0, b))
        for lm, lc in local.items():
            m = list(mono)
            for pos, j in enumerate(idx):
                m[2 * j], m[2 * j + 1] = lm[2 * pos], lm[2 * pos + 1]
            _accumulate(out, tuple(m), coef * lc)
    return f._new({m: c for m, c in out.items() if _nonzero(c)})
