"""Archimedean Weil representation on Gaussian-polynomial functions.

The group is ``U(1,1)`` at each archimedean place of a totally real field
with ``n_places`` real embeddings.  A function on ``V`` at all places is a
PolyGaussian whose variables come in consecutive blocks of ``m_dim``, one
block per place.  Each variable carries a sign, so the hermitian form at a
place is ``Q(z, z) = sum_j sign_j |z_j|^2``.

Conventions:

* ``omega(n(b)) f(x) = exp(2 pi i b Q(x, x)) f(x)``;
* ``omega(m(a)) f(x) = |a|_E^{m/2} f(x a)`` with ``|a|_E = |a|^2`` (the unitary
  normalization);
* ``omega(w0)`` is the Fourier transform on positive variables and its
  inverse on negative ones, so ``omega(w0)^2`` is the parity map;
* ``g_tau`` acts by ``v^{m/2} f(sqrt(v) x) exp(2 pi i u Q(x, x))`` at every
  place, i.e. ``g_tau = n(u) m(sqrt v)``.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from . import gausspoly as gp
from .errors import DecompositionUnsupported, DomainError, InputError, UnsupportedScale
from .field import QI2
from .gausspoly import PolyGaussian
from .numlat import HermitianLattice, NumberFieldBasis, trace_identity_check


@dataclass(frozen=True)
class GroupElementData:
    """One of ``n(b)``, ``m(a)``, ``w0``, ``g_tau`` or the identity, per archimedean place."""

    kind: str
    params: Tuple = ()

    def __post_init__(self):
        if self.kind not in ("identity", "n", "m", "w0", "g_tau"):
            raise InputError(f"unknown group element kind {self.kind!r}")
        if self.kind == "m" and any(complex(a) == 0 for a in self.params):
            raise DomainError("m(a) needs a != 0")
        if self.kind == "g_tau" and any(complex(t).imag <= 0 for t in self.params):
            raise DomainError("tau must lie in the upper half-plane at every place")

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def n(cls, *b):
        return cls("n", tuple(b))

    @classmethod
    def m(cls, *a):
        return cls("m", tuple(a))

    @classmethod
    def w0(cls):
        return cls("w0")

    @classmethod
    def g_tau(cls, *tau):
        return cls("g_tau", tuple(complex(t) for t in tau))


def _signs(f: PolyGaussian, signs: Optional[Sequence[int]]) -> List[int]:
    if signs is None:
        return [1] * f.num_vars
    signs = list(signs)
    if len(signs) != f.num_vars or any(s not in (1, -1) for s in signs):
        raise InputError("signs must be +1/-1, one per variable")
    return signs


def _blocks(f: PolyGaussian, places: int, m_dim: int) -> List[range]:
    if places * m_dim != f.num_vars:
        raise InputError(f"{places} places of dimension {m_dim} do not match "
                         f"{f.num_vars} variables")
    return [range(p * m_dim, (p + 1) * m_dim) for p in range(places)]


def _abs_power_exact(a: QI2, m: int) -> QI2:
    """``|a|^m`` inside Q(i, sqrt2) when it lies there."""
    n2 = (a * a.conjugate()).real_part()
    if m % 2 == 0:
        return n2 ** (m // 2)
    if n2.is_rational():
        q = n2.rational()
        root = _rational_sqrt(q)
        if root is not None:
            return QI2.from_rational(root) ** m
        half = _rational_sqrt(q / 2)
        if half is not None:
            return (QI2(0, 0, 1) * QI2.from_rational(half)) ** m
    raise UnsupportedScale(f"|a|^{m} is not in Q(i, sqrt2) for a = {a}")


def _rational_sqrt(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


def _act_n(f: PolyGaussian, b: Sequence, m_dim: int, signs: List[int]) -> PolyGaussian:
    g = f if not f.exact else f.to_numeric()
    for block, bp in zip(_blocks(g, len(b), m_dim), b):
        for j in block:
            g = gp.mul_gaussian(g, j, -2j * float(bp) * signs[j])
    return g


def _act_m(f: PolyGaussian, a: Sequence, m_dim: int) -> PolyGaussian:
    g = f
    blocks = _blocks(f, len(a), m_dim)
    for block, ap in zip(blocks, a):
        if g.exact:
            try:
                aq = QI2.coerce(ap)
            except (TypeError, ValueError):
                g = g.to_numeric()
        if g.exact:
            factor = _abs_power_exact(aq, m_dim)
            lam = aq
        else:
            lam = complex(ap)
            factor = abs(lam) ** m_dim
        for j in block:
            g = gp.rescale(g, j, lam)
        g = g.scale_by(factor)
    return g


def _act_w0(f: PolyGaussian, signs: List[int]) -> PolyGaussian:
    g = f
    for j in range(f.num_vars):
        g = gp.fourier_transform(g, j)
        if signs[j] < 0:
            g = gp.parity(g, [j])
    return g


def act(g: GroupElementData, f: PolyGaussian, m_dim: int,
        signs: Optional[Sequence[int]] = None) -> PolyGaussian:
    """``omega(g) f``."""
    sg = _signs(f, signs)
    if g.kind == "identity":
        return f
    if g.kind == "n":
        return _act_n(f, g.params, m_dim, sg)
    if g.kind == "m":
        return _act_m(f, g.params, m_dim)
    if g.kind == "w0":
        return _act_w0(f, sg)
    tau = g.params
    v = [t.imag for t in tau]
    out = _act_m(f.to_numeric(), [math.sqrt(vp) for vp in v], m_dim)
    return _act_n(out, [t.real for t in tau], m_dim, sg)


def hermitian_values(xi: Sequence[complex], places: int, m_dim: int,
                     signs: Optional[Sequence[int]] = None) -> List[float]:
    """``Q(xi, xi)`` at each place."""
    signs = [1] * len(xi) if signs is None else list(signs)
    return [sum(signs[j] * abs(complex(xi[j])) ** 2
                for j in range(p * m_dim, (p + 1) * m_dim)) for p in range(places)]


def e_star(b_embeddings: Sequence[float], tau: Sequence[complex]) -> complex:
    """``exp(2 pi i sum_j lambda_j(b) tau_j)``."""
    return cmath.exp(2j * math.pi * sum(float(lb) * complex(t) for lb, t in zip(b_embeddings, tau)))


def g_tau_evaluate(tau: Sequence[complex], f: PolyGaussian, xi: Sequence[complex],
                   m_dim: int, signs: Optional[Sequence[int]] = None) -> complex:
    """``prod v_j^{m/2} f(xi sqrt v) e_*(b u)`` with ``b = Q(xi, xi)``."""
    tau = [complex(t) for t in tau]
    if any(t.imag <= 0 for t in tau):
        raise DomainError("tau must lie in the upper half-plane at every place")
    places = len(tau)
    _blocks(f, places, m_dim)
    v = [t.imag for t in tau]
    u = [t.real for t in tau]
    point = [complex(xi[j]) * math.sqrt(v[j // m_dim]) for j in range(f.num_vars)]
    b = hermitian_values(xi, places, m_dim, signs)
    weight = math.prod(vp ** (m_dim / 2) for vp in v)
    return weight * f.evaluate(point) * e_star(b, u)


def siegel_weil_section(f: PolyGaussian, s: complex, g: GroupElementData, m_dim: int,
                        n_dim: int = 1, signs: Optional[Sequence[int]] = None) -> complex:
    """``|det a(g)|_E^{s - s0} (omega(g) f)(0)`` with ``s0 = (m - n)/2``."""
    s0 = (m_dim - n_dim) / 2
    if g.kind == "identity" or g.kind == "n":
        det_abs = 1.0
    elif g.kind == "m":
        det_abs = math.prod(abs(complex(a)) ** 2 for a in g.params)
    elif g.kind == "g_tau":
        det_abs = math.prod(t.imag for t in g.params)
    else:
        raise DecompositionUnsupported("only elements of the Siegel parabolic are supported")
    value = act(g, f, m_dim, signs).evaluate([0] * f.num_vars)
    return complex(det_abs ** (s - s0)) * value


def kappa(b_embeddings: Sequence[float], n: int = 1) -> complex:
    """``i^{-n} exp(-pi tr_{E/F} Q(xi, xi))`` summed over places, with ``Q(xi, xi) = b``."""
    return (1j) ** (-n) * math.exp(-2 * math.pi * sum(float(x) for x in b_embeddings))


# ---------------------------------------------------------------------------
# Fourier coefficients


@dataclass(frozen=True)
class VolumeRecord:
    b: Tuple[Fraction, ...]
    i: int
    vol: Fraction
    mult: int = 1
    orbit: int = 0


class VolumeTable:
    """Volumes of the cycles contributing to each Fourier coefficient."""

    def __init__(self, records: Sequence[VolumeRecord] = ()):
        self.records = list(records)
        for r in self.records:
            if r.vol < 0:
                raise InputError("volumes must be non-negative")
            if r.mult < 1:
                raise InputError("multiplicities must be at least 1")

    @classmethod
    def from_json(cls, obj) -> "VolumeTable":
        if not isinstance(obj, list):
            raise InputError("volume table must be a JSON list")
        recs = []
        try:
            for k, e in enumerate(obj):
                recs.append(VolumeRecord(tuple(Fraction(str(x)) for x in e["b"]),
                                         int(e.get("i", 0)), Fraction(str(e["vol"])),
                                         int(e.get("mult", 1)), int(e.get("orbit", k))))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"malformed volume record: {exc}") from None
        return cls(recs)

    @classmethod
    def load(cls, path: str) -> "VolumeTable":
        with open(path) as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}: {exc}") from None
        return cls.from_json(obj)

    def b_values(self) -> List[Tuple[Fraction, ...]]:
        return sorted({r.b for r in self.records})

    def filtered(self, b) -> List[VolumeRecord]:
        key = tuple(Fraction(x) for x in b)
        return [r for r in self.records if r.b == key]

    def total_volume(self, b) -> Fraction:
        return sum((r.vol * r.mult for r in self.filtered(b)), Fraction(0))

    def scaled(self, factor) -> "VolumeTable":
        f = Fraction(factor)
        return VolumeTable([VolumeRecord(r.b, r.i, r.vol * f, r.mult, r.orbit)
                            for r in self.records])


def _embeddings(b, FB: Optional[NumberFieldBasis]) -> List[float]:
    if FB is None:
        if len(b) != 1:
            raise InputError("a field basis is needed for b with more than one coordinate")
        return [float(b[0])]
    return FB.field.embeddings(FB.from_r_coords(b))


def assemble_fourier_coefficient(b, table: VolumeTable, tau: Sequence[complex], m_dim: int,
                                 FB: Optional[NumberFieldBasis] = None) -> complex:
    """``i^{-n} prod v_j^{m/2} (sum vol * mult) e_*(b tau)`` with ``n`` the number of places."""
    tau = [complex(t) for t in tau]
    n = len(tau)
    total = table.total_volume(b)
    if total == 0:
        return 0j
    weight = math.prod(t.imag ** (m_dim / 2) for t in tau)
    return (1j) ** (-n) * weight * float(total) * e_star(_embeddings(b, FB), tau)


def generating_series(table: VolumeTable, tau: Sequence[complex], m_dim: int, c0=0,
                      FB: Optional[NumberFieldBasis] = None) -> complex:
    """``c0 + sum_b i^n prod v_j^{-m/2} I_b(g_tau)``."""
    tau = [complex(t) for t in tau]
    n = len(tau)
    pref = (1j) ** n * math.prod(t.imag ** (-m_dim / 2) for t in tau)
    return complex(c0) + sum(pref * assemble_fourier_coefficient(b, table, tau, m_dim, FB)
                             for b in table.b_values())


def q_expansion(table: VolumeTable, tau: Sequence[complex], m_dim: int,
                FB: Optional[NumberFieldBasis] = None) -> List[Tuple[Tuple[Fraction, ...], complex]]:
    """Terms ``(b, I(C, C_b) e_*(b tau))`` of the generating series, in b order."""
    tau = [complex(t) for t in tau]
    n = len(tau)
    pref = (1j) ** n * math.prod(t.imag ** (-m_dim / 2) for t in tau)
    return [(b, pref * assemble_fourier_coefficient(b, table, tau, m_dim, FB))
            for b in table.b_values()]


def q_expansion_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    width = max((len(b) for b, _ in rows), default=1)
    w.writerow([f"b{k}" for k in range(width)] + ["abs", "arg"])
    for b, c in rows:
        w.writerow([str(x) for x in b] + [repr(abs(c)), repr(cmath.phase(c) if c else 0.0)])
    return buf.getvalue()


def prefactor_identity(n: int, v, m: int) -> bool:
    """``i^n v^{-m/2} * i^{-n} v^{m/2} == 1`` as an exact symbolic identity."""
    vv = sympy.nsimplify(v) if not isinstance(v, sympy.Basic) else v
    half = sympy.Rational(m, 2)
    expr = sympy.I ** n * vv ** (-half) * sympy.I ** (-n) * vv ** half
    return sympy.simplify(expr - 1) == 0


# ---------------------------------------------------------------------------
# intertwining on unipotent elements


def intertwining_check(b: Sequence, FB: NumberFieldBasis, L0: HermitianLattice,
                       samples: int = 100, seed: int = 0, size: int = 3) -> dict:
    """Compare the phases of ``n(b)`` on ``V`` and on ``V0^g`` for random lattice vectors.

    The vectors ``x`` are assembled as ``xi = sum s_i x_i`` and ``B`` is the
    matrix of multiplication by ``b`` from the dual basis to the integral one.
    """
    rng = random.Random(seed)
    g = FB.degree
    mismatches = 0
    phase_err = 0.0
    for _ in range(samples):
        x = [[(rng.randint(-size, size), rng.randint(-size, size)) for _ in range(L0.rank)]
             for _ in range(g)]
        rep = trace_identity_check(FB, L0, b, x, x, pairing="dual")
        lhs = [Fraction(c) for c in rep["lhs"]]
        rhs = [Fraction(c) for c in rep["rhs"]]
        if not rep["equal"]:
            mismatches += 1
        tl, tr = L0.E0.trace(tuple(lhs)), L0.E0.trace(tuple(rhs))
        phase_err = max(phase_err, abs(cmath.exp(1j * math.pi * float(tl))
                                       - cmath.exp(1j * math.pi * float(tr))))
    return {"samples": samples, "mismatches": mismatches, "max_phase_error": phase_err,
            "equal": mismatches == 0}
