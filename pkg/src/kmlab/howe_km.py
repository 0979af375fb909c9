"""Wedge algebra, Howe operators and the Kudla-Millson Schwartz function.

Generators of the exterior algebra are triples ``(conj, k, j)``: ``conj`` is
0 for xi_{jk} and 1 for its conjugate, ``1 <= k <= q`` and ``1 <= j <= p``.
Sorting generators as tuples gives the canonical order, which places every
unbarred generator before the barred ones and orders each group by ``k``
first and ``j`` second.  The canonical top word is therefore exactly
``omega ^ conj(omega)``.

The Howe operator attached to xi_{jk} acts on the Schwartz factor by
``conj(z_j) - (1/pi) d/dz_j``; its conjugate pairs conj(xi_{jk}) with
``z_j - (1/pi) d/dconj(z_j)``.  For a single variable,
``F_{a,b} phi_0`` is the result of ``a`` barred and ``b`` unbarred operators.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from . import _kernels
from .errors import ResourceLimit, UnsupportedScale
from .field import INV_PI, Coefficient, QI2
from .gausspoly import (PolyGaussian, apply_D, mu_gap, mul_poly, poly_derivative,
                        radial_substitute, tensor)

Generator = Tuple[int, int, int]
Word = Tuple[Generator, ...]

DEFAULT_TERM_BUDGET = 5_000_000


def term_budget() -> int:
    """Term budget, overridable through the ``KMLAB_TERM_BUDGET`` variable."""
    raw = os.environ.get("KMLAB_TERM_BUDGET")
    if raw is None or raw == "":
        return DEFAULT_TERM_BUDGET
    return int(float(raw))


def xi(j: int, k: int, conjugated: bool = False) -> Generator:
    return (1 if conjugated else 0, k, j)


def _code(g: Generator) -> int:
    conj, k, j = g
    return (conj << 40) | (k << 20) | j


def canonical(gens: Sequence[Generator]) -> Tuple[int, Word]:
    """Sort a generator sequence; returns ``(sign, word)`` with sign 0 on repeats."""
    gens = tuple(gens)
    if len(set(gens)) != len(gens):
        return 0, ()
    parity = _kernels.inversion_parity([_code(g) for g in gens])
    return (-1 if parity else 1), tuple(sorted(gens))


@dataclass(frozen=True)
class WedgeWord:
    """A signed product of generators; ``sign == 0`` encodes the zero form."""

    gens: Word
    sign: int = 1

    def normalized(self) -> "WedgeWord":
        s, w = canonical(self.gens)
        return WedgeWord(w, s * self.sign)

    def is_zero(self) -> bool:
        return self.sign == 0

    def __str__(self):
        if self.sign == 0:
            return "0"
        body = " ^ ".join(("xib" if c else "xi") + f"_{j}{k}" for c, k, j in self.gens) or "1"
        return ("-" if self.sign < 0 else "") + body


def wedge_mul(w1: WedgeWord, w2: WedgeWord) -> WedgeWord:
    return WedgeWord(w1.gens + w2.gens, w1.sign * w2.sign).normalized()


def top_word(p: int, q: int) -> Word:
    """The canonical word of ``omega ^ conj(omega)``."""
    omega = [xi(j, k) for k in range(1, q + 1) for j in range(1, p + 1)]
    omega_bar = [xi(j, k, True) for k in range(1, q + 1) for j in range(1, p + 1)]
    s, w = canonical(omega + omega_bar)
    assert s == 1
    return w


class KMForm:
    """A finite sum of canonical wedge words with PolyGaussian values."""

    __slots__ = ("num_vars", "terms")

    def __init__(self, num_vars: int, terms: Optional[Dict[Word, PolyGaussian]] = None):
        self.num_vars = num_vars
        self.terms: Dict[Word, PolyGaussian] = {}
        for w, f in (terms or {}).items():
            self._add_term(w, f)

    def _add_term(self, word: Word, f: PolyGaussian, sign: int = 1):
        if sign == 0 or f.is_zero():
            return
        if f.num_vars != self.num_vars:
            raise ValueError("KMForm values must share one variable set")
        if sign < 0:
            f = -f
        cur = self.terms.get(word)
        new = f if cur is None else cur + f
        if new.is_zero():
            self.terms.pop(word, None)
        else:
            self.terms[word] = new

    def add_word(self, gens: Sequence[Generator], f: PolyGaussian):
        """Accumulate ``gens ⊗ f`` after canonical sorting."""
        s, w = canonical(gens)
        self._add_term(w, f, s)

    def __add__(self, other: "KMForm") -> "KMForm":
        out = KMForm(self.num_vars, self.terms)
        for w, f in other.terms.items():
            out._add_term(w, f)
        return out

    def __eq__(self, other):
        if not isinstance(other, KMForm):
            return NotImplemented
        return self.num_vars == other.num_vars and self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def scale_by(self, x) -> "KMForm":
        return KMForm(self.num_vars, {w: f.scale_by(x) for w, f in self.terms.items()})

    def component(self, word: Word) -> PolyGaussian:
        f = self.terms.get(tuple(word))
        if f is None:
            return PolyGaussian(self.num_vars, None, {})
        return f

    def to_json(self) -> dict:
        return {"num_vars": self.num_vars,
                "terms": [{"word": [list(g) for g in w], "sign": 1, "value": f.to_json()}
                          for w, f in sorted(self.terms.items())]}

    @classmethod
    def from_json(cls, obj: dict) -> "KMForm":
        out = cls(obj["num_vars"])
        for t in obj["terms"]:
            f = PolyGaussian.from_json(t["value"])
            out.add_word([tuple(g) for g in t["word"]], f.scale_by(t.get("sign", 1)))
        return out


def identity_form(f: PolyGaussian) -> KMForm:
    return KMForm(f.num_vars, {(): f})


def apply_howe(form: KMForm, p: int, q: int, conjugated: bool = False,
               offset: int = 0) -> KMForm:
    """Apply ``2^{-2q} prod_{k=1..q} sum_{j=1..p} A_{jk} ⊗ op_j`` to ``form``.

    ``op_j`` is ``conj(z_j) - (1/pi) d/dz_j`` (or its conjugate when
    ``conjugated``), acting on variable ``offset + j - 1``.  The factor with
    ``k = q`` acts first, so the generators come out in the order
    ``xi_{a_1,1} ^ ... ^ xi_{a_q,q} ^ (old word)``.
    """
    for f in form.terms.values():
        if any(complex(f.scales[offset + j]) != 1 for j in range(p)):
            raise UnsupportedScale("Howe operators need the standard Gaussian")
    # words stay uncanonicalized until the end so each sign is computed once
    seqs: List[Tuple[Word, PolyGaussian]] = list(form.terms.items())
    for k in range(q, 0, -1):
        nxt: Dict[Word, PolyGaussian] = {}
        for word, f in seqs:
            for j in range(1, p + 1):
                g = xi(j, k, conjugated)
                if g in word:
                    continue
                h = apply_D(f, offset + j - 1, conjugated=not conjugated)
                if h.is_zero():
                    continue
                key = (g,) + word
                cur = nxt.get(key)
                nxt[key] = h if cur is None else cur + h
        seqs = list(nxt.items())
    out = KMForm(form.num_vars)
    scale = Coefficient.coerce(Fraction(1, 2 ** (2 * q)))
    for word, f in seqs:
        out.add_word(word, f.scale_by(scale))
    return out


def km_form(p: int, q: int) -> KMForm:
    """The form ``D^+ conj(D^+) phi_0`` on ``C^(p+q)`` (``1 ⊗ phi_0`` when q = 0)."""
    if p < 1 or q < 0:
        raise ValueError("need p >= 1 and q >= 0")
    phi0 = PolyGaussian.gaussian(p + q)
    form = identity_form(phi0)
    if q == 0:
        return form
    form = apply_howe(form, p, q, conjugated=True)
    return apply_howe(form, p, q, conjugated=False)


def multi_indices(p: int, q: int) -> Iterator[Tuple[int, ...]]:
    return itertools.product(range(1, p + 1), repeat=q)


def _multiplicities(alpha: Sequence[int], p: int) -> List[int]:
    out = [0] * p
    for a in alpha:
        out[a - 1] += 1
    return out


def product_of_Fab(mults: Sequence[Tuple[int, int]], extra_vars: int = 0) -> PolyGaussian:
    """``prod_i F_{a_i,b_i}(z_i) phi_0`` followed by ``extra_vars`` plain Gaussians."""
    out = None
    for a, b in mults:
        piece = F_ab(a, b)
        out = piece if out is None else tensor(out, piece)
    if extra_vars:
        g = PolyGaussian.gaussian(extra_vars)
        out = g if out is None else tensor(out, g)
    return out


def km_form_expansion(p: int, q: int, pairing: str = "composition") -> KMForm:
    """The sum over multi-indices ``2^{-4q} sum B_alpha ^ conj(B_alpha') ⊗ (...) phi_0``.

    With ``pairing="composition"`` the unbarred word ``B_alpha`` carries the
    operators ``conj(z) - (1/pi) d/dz`` produced by composing the two Howe
    operators.  ``pairing="literal"`` attaches ``z - (1/pi) d/dconj(z)`` to
    ``B_alpha`` instead; it is kept for comparison only.
    """
    if pairing not in ("composition", "literal"):
        raise ValueError("pairing must be 'composition' or 'literal'")
    form = KMForm(p + q)
    scale = Coefficient.coerce(Fraction(1, 2 ** (4 * q)))
    for alpha in multi_indices(p, q):
        m = _multiplicities(alpha, p)
        word_a = [xi(a, k + 1) for k, a in enumerate(alpha)]
        for alpha2 in multi_indices(p, q):
            m2 = _multiplicities(alpha2, p)
            word_b = [xi(a, k + 1, True) for k, a in enumerate(alpha2)]
            if pairing == "composition":
                mults = list(zip(m, m2))
            else:
                mults = list(zip(m2, m))
            f = product_of_Fab(mults, q).scale_by(scale)
            form.add_word(word_a + word_b, f)
    return form


def wedge_forms(f1: KMForm, f2: KMForm) -> KMForm:
    """Wedge product with the PolyGaussians placed on disjoint variable blocks."""
    out = KMForm(f1.num_vars + f2.num_vars)
    for w1, g1 in f1.terms.items():
        for w2, g2 in f2.terms.items():
            out.add_word(w1 + w2, tensor(g1, g2))
    return out


def wedge_power(form: KMForm, n: int) -> KMForm:
    """The n-fold wedge of ``form`` with the i-th factor on the i-th copy."""
    if n < 1:
        raise ValueError("n must be positive")
    out = form
    for _ in range(n - 1):
        out = wedge_forms(out, form)
    return out


def top_wedge_coefficient(form: KMForm, p: int, q: int) -> PolyGaussian:
    """Coefficient of ``omega ^ conj(omega)`` in ``form``."""
    return form.component(top_word(p, q))


# ---------------------------------------------------------------------------
# permutation sums


def permutations(p: int) -> List[Tuple[int, ...]]:
    """Elements of S_p as image tuples ``(s(1), ..., s(p))`` in lexicographic order."""
    return list(itertools.permutations(range(1, p + 1)))


def xis_word(p: int, q: int, sigma: Sequence[Sequence[int]],
             sigma2: Sequence[Sequence[int]]) -> List[Generator]:
    """The generator sequence attached to a pair of q-tuples of permutations."""
    word: List[Generator] = []
    for j in range(1, p + 1):
        word.extend(xi(sigma[k][j - 1], k + 1) for k in range(q))
        word.extend(xi(sigma2[k][j - 1], k + 1, True) for k in range(q))
    return word


def sort_sign(p: int, q: int, sigma: Sequence[Sequence[int]],
              sigma2: Sequence[Sequence[int]]) -> int:
    """Sign of the permutation that sorts the word into ``omega ^ conj(omega)``."""
    s, w = canonical(xis_word(p, q, sigma, sigma2))
    if s == 0 or w != top_word(p, q):
        raise ValueError("the permutation data does not produce the top word")
    return s


def lemma_sign(p: int, q: int) -> int:
    return -1 if (p * q * (p - 1) // 2) % 2 else 1


def sign_character_prediction(p: int, q: int, sigma, sigma2) -> int:
    """``lemma_sign * prod_k sgn(sigma_k) sgn(sigma2_k)``; the exact sort sign."""
    s = lemma_sign(p, q)
    for perm in list(sigma) + list(sigma2):
        if _kernels.inversion_parity(perm):
            s = -s
    return s


def _block_multiplicities(p: int, q: int, sigma, sigma2, j: int) -> Tuple[Tuple[int, int], ...]:
    a = [0] * p
    b = [0] * p
    for k in range(q):
        a[sigma[k][j] - 1] += 1
        b[sigma2[k][j] - 1] += 1
    return tuple(zip(a, b))


def check_budget(p: int, q: int, budget: Optional[int] = None) -> int:
    """Estimated cost of the permutation sum; raises ResourceLimit past the budget."""
    budget = term_budget() if budget is None else budget
    n_terms = math.factorial(p) ** (2 * q)
    cost = n_terms * p * (p + q)
    if cost > budget:
        raise ResourceLimit(f"(p,q)=({p},{q}) needs about {cost} term operations; "
                            f"budget is {budget} (set KMLAB_TERM_BUDGET to raise it)")
    return cost


def iter_sigma_pairs(p: int, q: int) -> Iterator[Tuple[Tuple, Tuple]]:
    perms = permutations(p)
    for sigma in itertools.product(perms, repeat=q):
        for sigma2 in itertools.product(perms, repeat=q):
            yield sigma, sigma2


def sigma_term(p: int, q: int, sigma, sigma2) -> PolyGaussian:
    """``prod_j prod_k`` of the block operators applied to ``Phi_0`` on ``(C^m)^p``."""
    out = None
    for j in range(p):
        block = _block_function(p, q, _block_multiplicities(p, q, sigma, sigma2, j))
        out = block if out is None else tensor(out, block)
    return out


@lru_cache(maxsize=None)
def _block_function(p: int, q: int, mults: Tuple[Tuple[int, int], ...]) -> PolyGaussian:
    return product_of_Fab(mults, q)


def km_schwartz(p: int, q: int, budget: Optional[int] = None) -> PolyGaussian:
    """The scalar function with ``phi^+_{pq,pq}`` equal to ``2^{-4pq} (omega ^ conj(omega)) ⊗ it``.

    Every ``(sigma, sigma')`` term carries the exact sign of sorting its wedge
    word, so the result is the top-degree coefficient of the p-fold wedge
    power up to the constant ``2^{-4pq}`` from the Howe operators.
    """
    if p < 1 or q < 1:
        raise ValueError("need p >= 1 and q >= 1")
    check_budget(p, q, budget)
    total = PolyGaussian.gaussian(p * (p + q)).zero()
    for sigma, sigma2 in iter_sigma_pairs(p, q):
        s = sort_sign(p, q, sigma, sigma2)
        term = sigma_term(p, q, sigma, sigma2)
        total = total + (term if s > 0 else -term)
    return total


def km_schwartz_lemma(p: int, q: int, budget: Optional[int] = None) -> PolyGaussian:
    """``(-1)^{pq(p-1)/2}`` times the unsigned sum of all ``(sigma, sigma')`` terms."""
    if p < 1 or q < 1:
        raise ValueError("need p >= 1 and q >= 1")
    check_budget(p, q, budget)
    total = PolyGaussian.gaussian(p * (p + q)).zero()
    for sigma, sigma2 in iter_sigma_pairs(p, q):
        total = total + sigma_term(p, q, sigma, sigma2)
    return total if lemma_sign(p, q) > 0 else -total


def extraction_check(p: int, q: int) -> dict:
    """Compare the top coefficient of the p-fold wedge with ``2^{-4pq} km_schwartz``."""
    top = top_wedge_coefficient(wedge_power(km_form(p, q), p), p, q)
    expected = km_schwartz(p, q).scale_by(Fraction(1, 2 ** (4 * p * q)))
    lemma = km_schwartz_lemma(p, q).scale_by(Fraction(1, 2 ** (4 * p * q)))
    return {"case": [p, q], "equal": top == expected, "top_terms": len(top),
            "matches_unsigned_lemma": top == lemma}


# ---------------------------------------------------------------------------
# the single-variable family


@lru_cache(maxsize=None)
def F_ab(a: int, b: int) -> PolyGaussian:
    """``F_{a,b} phi_0``: ``a`` barred and ``b`` unbarred operators applied to ``phi_0``."""
    if a < 0 or b < 0:
        raise ValueError("a and b must be non-negative")
    f = PolyGaussian.gaussian(1)
    for _ in range(b):
        f = apply_D(f, 0, conjugated=False)
    for _ in range(a):
        f = apply_D(f, 0, conjugated=True)
    return f


def f_k(k: int) -> PolyGaussian:
    return F_ab(k, k)


def E_display(f: PolyGaussian) -> PolyGaussian:
    """Closed formula for the composite operator on ``f phi_0`` with ``f`` polynomial.

    Returns the polynomial multiplying ``phi_0``; it should agree with
    applying the unbarred and then the barred operator to ``f phi_0``.
    """
    fz = poly_derivative(f, 0)
    fzb = poly_derivative(f, 0, conjugated=True)
    fzzb = poly_derivative(fz, 0, conjugated=True)
    part1 = mul_poly(f, (1, 1), 4) + f.scale_by(-2 * INV_PI)
    part2 = (mul_poly(fzb, (1, 0)) + mul_poly(fz, (0, 1))).scale_by(-2 * INV_PI)
    part3 = fzzb.scale_by(INV_PI * INV_PI)
    return part1 + part2 + part3


def laguerre_coefficients(k: int) -> List[int]:
    """Coefficients of ``|w|^{2r}`` in the monic integral Laguerre polynomial g_k."""
    return [(-1) ** (r + k) * math.factorial(k) ** 2
            // (math.factorial(r) ** 2 * math.factorial(k - r)) for r in range(k + 1)]


def _radial_poly(coeffs: Sequence) -> PolyGaussian:
    return PolyGaussian(1, None, {(r, r): c for r, c in enumerate(coeffs)})


@lru_cache(maxsize=None)
def _laguerre_recursive(k: int) -> PolyGaussian:
    if k == 0:
        return _radial_poly([1])
    g = _laguerre_recursive(k - 1)
    gw = poly_derivative(g, 0)
    gwb = poly_derivative(g, 0, conjugated=True)
    return (mul_poly(g, (1, 1)) - g
            - (mul_poly(gwb, (1, 0)) + mul_poly(gw, (0, 1)))
            + poly_derivative(gw, 0, conjugated=True))


def laguerre_g(k: int, mode: str = "closed") -> PolyGaussian:
    """g_k as a polynomial in ``|w|^2`` (stored on one variable, scale 1)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if mode == "closed":
        return _radial_poly(laguerre_coefficients(k))
    if mode == "recursive":
        return _laguerre_recursive(k)
    raise ValueError("mode must be 'closed' or 'recursive'")


def normalized_f_k(k: int) -> PolyGaussian:
    """``f_k(w / sqrt(2 pi)) * pi^k / 2^k`` on the polynomial part."""
    t = Coefficient.pi_power(-1, QI2.from_rational(Fraction(1, 2)))
    g = radial_substitute(f_k(k), 0, t)
    return g.scale_by(Coefficient.pi_power(k, QI2.from_rational(Fraction(1, 2 ** k))))


def mu(f: PolyGaussian) -> int:
    """Minimum over stored monomials of (z-exponent minus conj(z)-exponent)."""
    return mu_gap(f, 0)[0]
