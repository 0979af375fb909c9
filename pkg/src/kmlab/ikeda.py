"""Isotropic splitting, the Ikeda map and the vanishing checks built on it.

Coordinates of one copy of ``C^m`` are 0-based slots.  A :class:`SplitFrame`
with ``r0`` hyperbolic pairs replaces the slots ``j - 1`` and ``m - j`` (for
``1 <= j <= r0``) by the coordinates ``w_e`` and ``w_f`` along

    e_j = (u_j + u_{m+1-j}) / sqrt2,    f_j = (u_j - u_{m+1-j}) / sqrt2,

with ``w_e`` stored in slot ``j - 1`` and ``w_f`` in slot ``m - j``.  The
remaining slots ``r0 .. m - r0 - 1`` are the coordinates of the orthogonal
complement.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import DomainError, UnsupportedScale
from .field import INV_SQRT2_QI2, ONE_QI2, SQRT2_QI2, Coefficient, QI2
from .gausspoly import (PolyGaussian, cayley_unitary, fourier_transform, integrate,
                        linear_substitution, moment_integral, mu_gap, mul_gaussian, parity,
                        rescale, restrict_zero, unitary_substitution)
from .howe_km import (F_ab, check_budget, f_k, iter_sigma_pairs, km_schwartz,
                      km_schwartz_lemma, sigma_term, sort_sign)

SPLIT_MATRIX = ((INV_SQRT2_QI2, INV_SQRT2_QI2), (INV_SQRT2_QI2, -INV_SQRT2_QI2))


@dataclass(frozen=True)
class SplitFrame:
    m: int
    r0: int

    def __post_init__(self):
        if self.m < 0 or self.r0 < 0 or 2 * self.r0 > self.m:
            raise DomainError(f"need 0 <= 2*r0 <= m, got m={self.m}, r0={self.r0}")

    @property
    def pairs(self) -> List[Tuple[int, int]]:
        """0-based ``(e-slot, f-slot)`` pairs."""
        return [(j - 1, self.m - j) for j in range(1, self.r0 + 1)]

    @property
    def e_slots(self) -> List[int]:
        return [j - 1 for j in range(1, self.r0 + 1)]

    @property
    def f_slots(self) -> List[int]:
        return [self.m - j for j in range(1, self.r0 + 1)]

    @property
    def complement_slots(self) -> List[int]:
        return list(range(self.r0, self.m - self.r0))


def split_coordinates(f: PolyGaussian, frame: SplitFrame, copy: int = 0) -> PolyGaussian:
    """Rewrite one copy of ``C^m`` in the ``(w_e, x', w_f)`` coordinates of ``frame``."""
    off = copy * frame.m
    if off + frame.m > f.num_vars:
        raise IndexError("copy index outside the function's variables")
    pairs = [(off + e, off + g) for e, g in frame.pairs]
    if not pairs:
        return f
    return linear_substitution(f, pairs, SPLIT_MATRIX)


def split_all(f: PolyGaussian, frame: SplitFrame, copies: int) -> PolyGaussian:
    if f.num_vars != copies * frame.m:
        raise ValueError(f"expected {copies * frame.m} variables, got {f.num_vars}")
    for c in range(copies):
        f = split_coordinates(f, frame, c)
    return f


def _slots(frame: SplitFrame, copies: int, which: str) -> List[int]:
    local = {"e": frame.e_slots, "f": frame.f_slots}[which]
    return [c * frame.m + s for c in range(copies) for s in local]


def ikeda_map(f: PolyGaussian, frame: SplitFrame, copies: int = 1) -> PolyGaussian:
    """Set the f-coordinates to zero, then integrate out the e-coordinates.

    Returns a function of the complement coordinates of every copy, in copy
    order.
    """
    g = split_all(f, frame, copies)
    g = restrict_zero(g, _slots(frame, copies, "f"))
    width = frame.m - frame.r0
    e_after = [c * width + s for c in range(copies) for s in range(frame.r0)]
    for j in sorted(e_after, reverse=True):
        g = integrate(g, j)
    return g


def partial_fourier(f: PolyGaussian, u_block: Sequence[int],
                    dual_block: Optional[Sequence[int]] = None) -> PolyGaussian:
    """Fourier transform in the ``u_block`` variables only.

    By default each dual variable stays in the slot it came from.  With a
    ``dual_block`` disjoint from ``u_block``, the transform of slot
    ``u_block[i]`` is placed in slot ``dual_block[i]`` and the two slots
    swap their contents.
    """
    u = list(u_block)
    if f.exact and any(complex(f.scales[j]) != 1 for j in u):
        raise UnsupportedScale("partial Fourier transform needs scale 1 in exact mode")
    g = f
    for j in u:
        g = fourier_transform(g, j)
    if dual_block is None or list(dual_block) == u:
        return g
    d = list(dual_block)
    if len(d) != len(u) or len(set(d)) != len(d) or set(d) & set(u):
        raise ValueError("dual block must be disjoint from the transformed block")
    perm = list(range(f.num_vars))
    for src, dst in zip(u, d):
        perm[src], perm[dst] = dst, src
    return permute_variables(g, perm)


def permute_variables(f: PolyGaussian, perm: Sequence[int]) -> PolyGaussian:
    """New function whose variable ``i`` is old variable ``perm[i]``."""
    if sorted(perm) != list(range(f.num_vars)):
        raise ValueError("not a permutation of the variables")
    terms = {tuple(e for i in perm for e in (m[2 * i], m[2 * i + 1])): c
             for m, c in f.terms.items()}
    return PolyGaussian(f.num_vars, [f.scales[i] for i in perm], terms, f.exact,
                        _trusted=True)


def mixed_model(f: PolyGaussian, frame: SplitFrame, copies: int = 1) -> PolyGaussian:
    """Split coordinates, then Fourier transform every e-coordinate."""
    g = split_all(f, frame, copies)
    return partial_fourier(g, _slots(frame, copies, "e"))


def mixed_slice(f_hat: PolyGaussian, frame: SplitFrame, copies: int = 1) -> PolyGaussian:
    """Restrict a mixed-model function to dual e-coordinates 0 and f-coordinates 0."""
    return restrict_zero(f_hat, _slots(frame, copies, "e") + _slots(frame, copies, "f"))


def rank_support_report(f_hat: PolyGaussian, frame: SplitFrame, copies: int = 1) -> dict:
    """Whether the mixed-model function vanishes on the slice where the dual block is 0."""
    if frame.r0 != 1:
        raise DomainError("the slice test is only defined for one hyperbolic plane")
    sl = mixed_slice(f_hat, frame, copies)
    return {"r0": frame.r0, "copies": copies, "slice_zero": sl.is_zero(),
            "slice_terms": len(sl)}


# ---------------------------------------------------------------------------
# one-variable vanishing statements


def _lemma_integrand(f: PolyGaussian) -> PolyGaussian:
    """``h(z / sqrt2) exp(-pi |z|^2)`` from ``h phi_0`` (scale 1 in, scale 1 out)."""
    return mul_gaussian(rescale(f, 0, INV_SQRT2_QI2), 0, QI2(Fraction(1, 2)))


def _weight_integrand(f: PolyGaussian) -> PolyGaussian:
    """``h(z) exp(-2 pi |z|^2)`` from ``h phi_0``."""
    return mul_gaussian(f, 0, 1)


def _own_gaussian_rescaled(f: PolyGaussian) -> PolyGaussian:
    """``h(z / sqrt2) exp(-pi |z|^2 / 2)``: rescaling ``h phi_0`` with its own Gaussian."""
    return rescale(f, 0, INV_SQRT2_QI2)


def _binomial_terms(k: int) -> List[int]:
    return [(-1) ** r * math.comb(k, r) for r in range(k + 1)]


def fk_moment_expansion(k: int) -> List[Coefficient]:
    """Per-monomial contributions to the lemma integral of ``f_k``; they sum to zero."""
    g = _lemma_integrand(f_k(k))
    return [moment_integral(PolyGaussian(1, g.scales, {mono: c}))
            for mono, c in g.sorted_terms()]


def verify_fk_vanishing(k: int) -> dict:
    """Exact value of the integral of ``f_k(z/sqrt2) exp(-pi|z|^2)`` and related checks."""
    if k < 0:
        raise ValueError("k must be non-negative")
    f = f_k(k)
    lemma_value = moment_integral(_lemma_integrand(f))
    weight_value = moment_integral(_weight_integrand(f))
    own_value = moment_integral(_own_gaussian_rescaled(f))
    contributions = fk_moment_expansion(k)
    binom = _binomial_terms(k)
    # the contribution of |z|^{2r} is (-1)^k k! 2^k / pi^k times the binomial term
    unit = Coefficient.pi_power(-k, QI2((-1) ** k * math.factorial(k) * 2 ** k))
    matches = (len(contributions) == k + 1
               and all(c == unit * b for c, b in zip(contributions, binom)))
    return {
        "k": k,
        "value": str(lemma_value),
        "zero": lemma_value.is_zero(),
        "weighted_value": str(weight_value),
        "weighted_zero": weight_value.is_zero(),
        "own_gaussian_value": str(own_value),
        "binomial_sum": sum(binom),
        "binomial_zero": sum(binom) == 0 if k >= 1 else False,
        "expansion_matches_binomial": matches,
    }


def fk_weighted_integral(k: int, t) -> Coefficient:
    """Integral of ``f_k(z/sqrt2) exp(-pi t |z|^2)`` for a positive rational ``t``."""
    g = mul_gaussian(rescale(f_k(k), 0, INV_SQRT2_QI2), 0, QI2(Fraction(t)) - QI2(Fraction(1, 2)))
    return moment_integral(g)


def verify_fk_rescaled(k: int, lam) -> Coefficient:
    """The f_k integrand after the substitution ``z -> lam z``; its integral stays zero."""
    return moment_integral(rescale(_lemma_integrand(f_k(k)), 0, lam))


def verify_Fab_vanishing(a: int, b: int) -> dict:
    """Integral of ``F_{a,b}(z/sqrt2) exp(-pi|z|^2)`` for ``a != b`` with the exponent-gap witness."""
    if a == b:
        raise DomainError("the off-diagonal statement needs a != b")
    F = F_ab(a, b)
    value = moment_integral(_lemma_integrand(F))
    weighted = moment_integral(_weight_integrand(F))
    lo, hi = mu_gap(F, 0)
    gap_ok = (lo >= b - a) if b > a else (hi <= b - a)
    return {"a": a, "b": b, "value": str(value), "zero": value.is_zero(),
            "weighted_zero": weighted.is_zero(), "mu_min": lo, "mu_max": hi,
            "gap_witness": gap_ok}


@lru_cache(maxsize=None)
def line_factor(a: int, b: int) -> Coefficient:
    """Integral over one isotropic line of ``F_{a,b}(y/sqrt2) exp(-pi|y|^2)``."""
    return moment_integral(_lemma_integrand(F_ab(a, b)))


# ---------------------------------------------------------------------------
# the main vanishing theorem


def _line_multiplicities(p: int, q: int, sigma, sigma2, block: int, line: int) -> Tuple[int, int]:
    a = sum(1 for k in range(q) if sigma[k][block] == line)
    b = sum(1 for k in range(q) if sigma2[k][block] == line)
    return a, b


def term_certificate(p: int, q: int, sigma, sigma2) -> dict:
    """Find an isotropic line whose integral kills the ``(sigma, sigma')`` term."""
    for block in range(p):
        for line in range(1, q + 1):
            a, b = _line_multiplicities(p, q, sigma, sigma2, block, line)
            if (a, b) == (0, 0):
                continue
            value = line_factor(a, b)
            if value.is_zero():
                return {"block": block + 1, "line": line, "a": a, "b": b,
                        "case": 1 if a != b else 2}
    return {"block": None, "line": None, "a": None, "b": None, "case": None}


def verify_ikeda_kills(p: int, q: int, budget: Optional[int] = None,
                       per_term: bool = False) -> dict:
    """Ikeda map of the Kudla-Millson function on ``(C^{p+q})^p`` with ``q`` isotropic lines.

    The returned report holds the exact result and a certificate naming, for
    every ``(sigma, sigma')`` term, the line integral that vanishes.  With
    ``per_term`` the Ikeda map of every single term is also computed.
    """
    if p < 2 or q < 1:
        raise DomainError("need p >= 2 and q >= 1")
    check_budget(p, q, budget)
    start = time.perf_counter()
    frame = SplitFrame(p + q, q)
    phi = km_schwartz(p, q, budget)
    image = ikeda_map(phi, frame, p)
    lemma_image = ikeda_map(km_schwartz_lemma(p, q, budget), frame, p)
    certs = []
    case_counts = {1: 0, 2: 0}
    unclassified = 0
    per_term_zero = True
    for sigma, sigma2 in iter_sigma_pairs(p, q):
        cert = term_certificate(p, q, sigma, sigma2)
        cert["sigma"] = [list(s) for s in sigma]
        cert["sigma_prime"] = [list(s) for s in sigma2]
        cert["sign"] = sort_sign(p, q, sigma, sigma2)
        if cert["case"] is None:
            unclassified += 1
        else:
            case_counts[cert["case"]] += 1
        if per_term:
            z = ikeda_map(sigma_term(p, q, sigma, sigma2), frame, p).is_zero()
            cert["term_image_zero"] = z
            per_term_zero = per_term_zero and z
        certs.append(cert)
    elapsed = time.perf_counter() - start
    return {
        "case": [p, q],
        "result": "zero" if image.is_zero() else "nonzero",
        "term_count": len(certs),
        "case1_count": case_counts[1],
        "case2_count": case_counts[2],
        "unclassified": unclassified,
        "unsigned_sum_result": "zero" if lemma_image.is_zero() else "nonzero",
        "per_term_zero": per_term_zero if per_term else None,
        "elapsed": round(elapsed, 6),
        "certificate": certs,
    }


def zero_report(report: dict) -> dict:
    """The short JSON report for a vanishing check."""
    return {k: report[k] for k in ("case", "result", "term_count", "case1_count",
                                   "case2_count", "elapsed")}


# ---------------------------------------------------------------------------
# invariance spot checks


def random_skew_hermitian(n: int, rng: random.Random, size: int = 2) -> List[List[QI2]]:
    S = [[QI2(0) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        S[i][i] = QI2(0, Fraction(rng.randint(-size, size), rng.randint(1, size)))
        for j in range(i + 1, n):
            x = QI2(Fraction(rng.randint(-size, size), rng.randint(1, size)),
                    Fraction(rng.randint(-size, size), rng.randint(1, size)))
            S[i][j] = x
            S[j][i] = -x.conjugate()
    return S


def random_unitary(n: int, rng: random.Random) -> List[List[QI2]]:
    """An exactly unitary matrix over Q(i): a Cayley transform or a unit-phase diagonal."""
    if rng.random() < 0.25:
        units = [QI2(1), QI2(-1), QI2(0, 1), QI2(0, -1)]
        return [[rng.choice(units) if i == j else QI2(0) for j in range(n)] for i in range(n)]
    return cayley_unitary(random_skew_hermitian(n, rng))


def k_invariance_check(p: int, q: int, samples: int = 3, seed: int = 0,
                       signed: bool = True) -> List[bool]:
    """Apply one block-diagonal ``U(p) x U(q)`` element to every copy and compare."""
    rng = random.Random(seed)
    phi = km_schwartz(p, q) if signed else km_schwartz_lemma(p, q)
    m = p + q
    out = []
    for _ in range(samples):
        Up = random_unitary(p, rng)
        Uq = random_unitary(q, rng)
        g = phi
        for c in range(p):
            g = unitary_substitution(g, range(c * m, c * m + p), Up)
            g = unitary_substitution(g, range(c * m + p, c * m + m), Uq)
        out.append(g == phi)
    return out


def fourier_parity_check(f: PolyGaussian, block: Sequence[int]) -> bool:
    """Two partial transforms on ``block`` give the parity map on that block."""
    return partial_fourier(partial_fourier(f, block), block) == parity(f, block)


def random_polygaussian(num_vars: int, rng: random.Random, terms: int = 4,
                        max_degree: int = 3) -> PolyGaussian:
    """A random exact function at scale 1 with small Gaussian-rational coefficients."""
    out = {}
    for _ in range(terms):
        exps = tuple(rng.randint(0, max_degree) for _ in range(2 * num_vars))
        out[exps] = QI2(rng.randint(-4, 4), rng.randint(-4, 4), 0, 0, rng.randint(1, 3))
    return PolyGaussian(num_vars, None, {m: c for m, c in out.items() if not c.is_zero()})


def mixed_model_identity(samples: int = 10, seed: int = 0) -> List[dict]:
    """Compare the mixed model on the slice ``(v0, 0)`` with the Ikeda map, exactly."""
    rng = random.Random(seed)
    out = []
    for t in range(samples):
        m = rng.randint(2, 4)
        r0 = rng.randint(1, m // 2)
        copies = rng.randint(1, 2)
        frame = SplitFrame(m, r0)
        f = random_polygaussian(m * copies, rng, terms=rng.randint(1, 4), max_degree=2)
        lhs = mixed_slice(mixed_model(f, frame, copies), frame, copies)
        rhs = ikeda_map(f, frame, copies)
        out.append({"trial": t, "m": m, "r0": r0, "copies": copies, "terms": len(f),
                    "equal": lhs == rhs})
    return out
