"""Number fields, trace duality, hermitian lattices and finite group models.

Field elements of a totally real field ``F = Q(theta)`` are tuples of
Fractions in the power basis ``1, theta, ..., theta^{g-1}``.  Elements of
an imaginary quadratic field ``E0 = Q(omega)`` are pairs ``(a, b)`` meaning
``a + b*omega``, where ``omega = (1 + sqrt d)/2`` when ``d = 1 mod 4`` and
``omega = sqrt(d/4)`` when ``d = 0 mod 4``.  Elements of ``E = E0 F`` are
pairs ``(f0, f1)`` of F-elements meaning ``f0 + f1*omega``.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .errors import (CapExceeded, IndefiniteLattice, InputError, NonFreeAction,
                     SingularTraceForm)

Vec = Tuple[Fraction, ...]


# ---------------------------------------------------------------------------
# exact linear algebra over Q


def _fr(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10 ** 12)
    return Fraction(x)


def mat_inverse(M: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    """Inverse of a rational matrix; raises ZeroDivisionError when singular."""
    n = len(M)
    aug = [[_fr(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                fac = aug[r][col]
                aug[r] = [x - fac * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _det(M, zero, one, sub, mul, div, is_zero):
    n = len(M)
    A = [list(row) for row in M]
    det = one
    for col in range(n):
        piv = next((r for r in range(col, n) if not is_zero(A[r][col])), None)
        if piv is None:
            return zero
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            det = sub(zero, det)
        det = mul(det, A[col][col])
        for r in range(col + 1, n):
            if not is_zero(A[r][col]):
                fac = div(A[r][col], A[col][col])
                A[r] = [sub(x, mul(fac, y)) for x, y in zip(A[r], A[col])]
    return det


def mat_det(M: Sequence[Sequence[Fraction]]) -> Fraction:
    return _det([[_fr(x) for x in row] for row in M], Fraction(0), Fraction(1),
                lambda a, b: a - b, lambda a, b: a * b, lambda a, b: a / b,
                lambda a: a == 0)


def mat_mul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), Fraction(0))
             for j in range(len(B[0]))] for i in range(len(A))]


# ---------------------------------------------------------------------------
# totally real fields


class NumberField:
    """``Q[x]/(min_poly)`` for a monic rational polynomial (coefficients highest first)."""

    def __init__(self, min_poly: Sequence):
        coeffs = [_fr(c) for c in min_poly]
        if len(coeffs) < 2 or coeffs[0] != 1:
            raise InputError("min_poly must be monic of degree >= 1, highest coefficient first")
        self.min_poly = tuple(coeffs)
        self.degree = len(coeffs) - 1
        roots = np.roots([float(c) for c in coeffs])
        if np.max(np.abs(roots.imag), initial=0.0) > 1e-9:
            raise InputError("the field is not totally real")
        self.roots = sorted(float(r.real) for r in roots)
        if any(abs(a - b) < 1e-12 for a, b in zip(self.roots, self.roots[1:])):
            raise InputError("min_poly has repeated roots")
        self._trace_powers = self._compute_trace_powers()

    # element helpers
    def zero(self) -> Vec:
        return (Fraction(0),) * self.degree

    def one(self) -> Vec:
        return (Fraction(1),) + (Fraction(0),) * (self.degree - 1)

    def element(self, coords: Sequence) -> Vec:
        c = [_fr(x) for x in coords]
        if len(c) != self.degree:
            raise InputError(f"expected {self.degree} power-basis coordinates")
        return tuple(c)

    def from_rational(self, q) -> Vec:
        return (_fr(q),) + (Fraction(0),) * (self.degree - 1)

    def add(self, x: Vec, y: Vec) -> Vec:
        return tuple(a + b for a, b in zip(x, y))

    def sub(self, x: Vec, y: Vec) -> Vec:
        return tuple(a - b for a, b in zip(x, y))

    def scale(self, x: Vec, q) -> Vec:
        q = _fr(q)
        return tuple(a * q for a in x)

    def mul(self, x: Vec, y: Vec) -> Vec:
        g = self.degree
        prod = [Fraction(0)] * (2 * g - 1)
        for i, a in enumerate(x):
            if a:
                for j, b in enumerate(y):
                    if b:
                        prod[i + j] += a * b
        # reduce with theta^g = -(c_1 theta^{g-1} + ... + c_g)
        for top in range(2 * g - 2, g - 1, -1):
            c = prod[top]
            if c:
                prod[top] = Fraction(0)
                for t in range(1, g + 1):
                    prod[top - t] -= c * self.min_poly[t]
        return tuple(prod[:g])

    def _compute_trace_powers(self) -> List[Fraction]:
        g = self.degree
        out = []
        for k in range(g):
            # trace of multiplication by theta^k
            basis_k = tuple(Fraction(int(i == k)) for i in range(g))
            tr = Fraction(0)
            for i in range(g):
                e = tuple(Fraction(int(j == i)) for j in range(g))
                tr += self.mul(basis_k, e)[i]
            out.append(tr)
        return out

    def trace(self, x: Vec) -> Fraction:
        return sum((a * t for a, t in zip(x, self._trace_powers)), Fraction(0))

    def embed(self, x: Vec, t: int) -> float:
        r = self.roots[t]
        return sum(float(a) * r ** k for k, a in enumerate(x))

    def embeddings(self, x: Vec) -> List[float]:
        return [self.embed(x, t) for t in range(self.degree)]

    def mul_matrix_power_basis(self, x: Vec) -> List[List[Fraction]]:
        g = self.degree
        cols = [self.mul(x, tuple(Fraction(int(j == i)) for j in range(g))) for i in range(g)]
        return [[cols[j][i] for j in range(g)] for i in range(g)]

    def inverse(self, x: Vec) -> Vec:
        M = self.mul_matrix_power_basis(x)
        Minv = mat_inverse(M)
        return tuple(Minv[i][0] for i in range(self.degree))

    def is_totally_positive(self, x: Vec) -> bool:
        if all(a == 0 for a in x[1:]):
            return x[0] > 0
        vals = self.embeddings(x)
        return all(v > 1e-12 for v in vals)

    @classmethod
    def from_json(cls, obj) -> "NumberField":
        if not isinstance(obj, dict) or "min_poly" not in obj:
            raise InputError('field JSON needs a "min_poly" list')
        return cls(obj["min_poly"])


class NumberFieldBasis:
    """A Z-basis ``r_i`` of the integers of F together with its trace-dual basis ``s_i``."""

    def __init__(self, F: NumberField, basis: Optional[Sequence[Sequence]] = None):
        self.field = F
        g = F.degree
        if basis is None:
            basis = [[int(i == j) for j in range(g)] for i in range(g)]
        self.r = [F.element(b) for b in basis]
        if len(self.r) != g:
            raise InputError("basis must have one element per degree")
        self.T = [[F.trace(F.mul(a, b)) for b in self.r] for a in self.r]
        try:
            self.S = mat_inverse(self.T)
        except ZeroDivisionError:
            raise SingularTraceForm("the trace form of the basis is singular") from None
        # s_j = sum_i S[i][j] r_i
        self.s = [self._combine(self.r, [self.S[i][j] for i in range(g)]) for j in range(g)]
        self.U = [[F.embed(ri, t) for ri in self.r] for t in range(g)]

    @property
    def degree(self) -> int:
        return self.field.degree

    def _combine(self, vecs, coeffs) -> Vec:
        out = self.field.zero()
        for v, c in zip(vecs, coeffs):
            out = self.field.add(out, self.field.scale(v, c))
        return out

    def from_r_coords(self, coords: Sequence) -> Vec:
        return self._combine(self.r, [_fr(c) for c in coords])

    def to_r_coords(self, x: Vec) -> List[Fraction]:
        """Coordinates in the r-basis, read off with the dual basis."""
        return [self.field.trace(self.field.mul(x, sj)) for sj in self.s]

    def to_s_coords(self, x: Vec) -> List[Fraction]:
        return [self.field.trace(self.field.mul(x, ri)) for ri in self.r]

    def dual_check(self) -> bool:
        F = self.field
        return all(F.trace(F.mul(ri, sj)) == int(i == j)
                   for i, ri in enumerate(self.r) for j, sj in enumerate(self.s))


def trace_dual(F: NumberField, basis: Optional[Sequence[Sequence]] = None) -> NumberFieldBasis:
    return NumberFieldBasis(F, basis)


def mult_matrix(b: Sequence, FB: NumberFieldBasis, source: str = "s",
                target: str = "r") -> List[List[Fraction]]:
    """Matrix of ``x -> b x``; column ``j`` holds the target coordinates of ``b * source_j``.

    ``b`` is given in r-coordinates.  The default maps the dual basis to the
    integral basis.
    """
    F = FB.field
    bb = FB.from_r_coords(b)
    src = FB.s if source == "s" else FB.r
    to = FB.to_r_coords if target == "r" else FB.to_s_coords
    cols = [to(F.mul(bb, v)) for v in src]
    g = FB.degree
    return [[cols[j][i] for j in range(g)] for i in range(g)]


def standard_field(name: str) -> NumberFieldBasis:
    """A few fields used in tests and examples, with their integral bases."""
    table = {
        "Q": ([1, 0], None),
        "Q(sqrt2)": ([1, 0, -2], None),
        "Q(sqrt3)": ([1, 0, -3], None),
        "Q(sqrt5)": ([1, 0, -5], [[1, 0], [Fraction(1, 2), Fraction(1, 2)]]),
    }
    if name not in table:
        raise InputError(f"unknown field {name}")
    poly, basis = table[name]
    if name == "Q":
        F = NumberField([1, 0])
        return NumberFieldBasis(F, [[1]])
    return NumberFieldBasis(NumberField(poly), basis)


# ---------------------------------------------------------------------------
# imaginary quadratic fields


class ImagQuadratic:
    """``E0 = Q(sqrt d)`` for a discriminant ``d < 0`` with basis ``{1, omega}``."""

    def __init__(self, disc: int):
        d = int(disc)
        if d >= 0 or d % 4 not in (0, 1):
            raise InputError(f"{disc} is not a negative discriminant")
        self.disc = d
        if d % 4 == 1:
            self.t, self.n = 1, Fraction(1 - d, 4)
        else:
            self.t, self.n = 0, Fraction(-d, 4)
        # omega^2 = t*omega - n
        self.omega = complex(self.t / 2, math.sqrt(-d) / 2)

    def elem(self, a, b=0) -> Tuple[Fraction, Fraction]:
        return (_fr(a), _fr(b))

    def add(self, x, y):
        return (x[0] + y[0], x[1] + y[1])

    def sub(self, x, y):
        return (x[0] - y[0], x[1] - y[1])

    def neg(self, x):
        return (-x[0], -x[1])

    def mul(self, x, y):
        a, b = x
        c, d = y
        return (a * c - self.n * b * d, a * d + b * c + self.t * b * d)

    def conj(self, x):
        a, b = x
        return (a + self.t * b, -b)

    def norm(self, x) -> Fraction:
        return self.mul(x, self.conj(x))[0]

    def trace(self, x) -> Fraction:
        return 2 * x[0] + self.t * x[1]

    def inverse(self, x):
        nx = self.norm(x)
        c = self.conj(x)
        return (c[0] / nx, c[1] / nx)

    def div(self, x, y):
        return self.mul(x, self.inverse(y))

    def is_zero(self, x) -> bool:
        return x[0] == 0 and x[1] == 0

    def to_complex(self, x) -> complex:
        return float(x[0]) + float(x[1]) * self.omega

    def zero(self):
        return (Fraction(0), Fraction(0))

    def one(self):
        return (Fraction(1), Fraction(0))

    def det(self, M):
        return _det(M, self.zero(), self.one(), self.sub, self.mul, self.div, self.is_zero)


def ring_from_name(name: str) -> ImagQuadratic:
    """Accepts ``Q(i)``, ``Q(sqrt-3)``/``Q(sqrt(-3))`` or a discriminant such as ``-4``."""
    key = name.replace(" ", "").replace("(", "").replace(")", "").lower()
    aliases = {"qi": -4, "i": -4, "qsqrt-1": -4, "qsqrt-3": -3, "sqrt-3": -3}
    if key in aliases:
        return ImagQuadratic(aliases[key])
    try:
        return ImagQuadratic(int(name))
    except ValueError:
        raise InputError(f"unknown imaginary quadratic field {name!r}") from None


class CompositeField:
    """``E = E0 F`` with elements ``(f0, f1)`` meaning ``f0 + f1*omega``."""

    def __init__(self, E0: ImagQuadratic, F: NumberField):
        self.E0 = E0
        self.F = F

    def from_E0(self, x):
        return (self.F.from_rational(x[0]), self.F.from_rational(x[1]))

    def from_F(self, f):
        return (tuple(f), self.F.zero())

    def add(self, x, y):
        return (self.F.add(x[0], y[0]), self.F.add(x[1], y[1]))

    def mul(self, x, y):
        F, t, n = self.F, self.E0.t, self.E0.n
        f0g0 = F.mul(x[0], y[0])
        f1g1 = F.mul(x[1], y[1])
        c0 = F.sub(f0g0, F.scale(f1g1, n))
        c1 = F.add(F.add(F.mul(x[0], y[1]), F.mul(x[1], y[0])), F.scale(f1g1, t))
        return (c0, c1)

    def conj(self, x):
        F, t = self.F, self.E0.t
        return (F.add(x[0], F.scale(x[1], t)), F.scale(x[1], -1))

    def zero(self):
        return (self.F.zero(), self.F.zero())

    def trace_to_E0(self, x):
        return (self.F.trace(x[0]), self.F.trace(x[1]))

    def is_in_F(self, x) -> bool:
        return all(c == 0 for c in x[1])


# ---------------------------------------------------------------------------
# hermitian lattices


class HermitianLattice:
    """``O_E0^rank`` with the hermitian form ``Q0(x, y) = sum x_k G_kl conj(y_l)``."""

    def __init__(self, disc: int, gram: Sequence[Sequence]):
        self.E0 = ImagQuadratic(disc)
        self.rank = len(gram)
        self.gram = [[self.E0.elem(*entry) for entry in row] for row in gram]
        if any(len(row) != self.rank for row in self.gram):
            raise InputError("Gram matrix must be square")
        for k in range(self.rank):
            for l in range(self.rank):
                if self.gram[k][l] != self.E0.conj(self.gram[l][k]):
                    raise InputError("Gram matrix is not hermitian")
        self.minors = [self.E0.det([row[:k] for row in self.gram[:k]])
                       for k in range(1, self.rank + 1)]
        self.definite = all(m[1] == 0 and m[0] > 0 for m in self.minors)
        self._real_form = None

    @classmethod
    def from_json(cls, obj) -> "HermitianLattice":
        try:
            disc = int(obj["disc"])
            rank = int(obj["rank"])
            gram = obj["gram"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"lattice JSON is malformed: {exc}") from None
        if len(gram) != rank:
            raise InputError("rank does not match the Gram matrix")
        try:
            gram = [[(_fr(e[0]), _fr(e[1])) for e in row] for row in gram]
        except (TypeError, ValueError, IndexError, ZeroDivisionError) as exc:
            raise InputError(f"bad Gram entry: {exc}") from None
        return cls(disc, gram)

    def to_json(self) -> dict:
        return {"disc": self.E0.disc, "rank": self.rank,
                "gram": [[[str(a), str(b)] for a, b in row] for row in self.gram]}

    def require_definite(self):
        if not self.definite:
            raise IndefiniteLattice("the Gram matrix is not positive definite")

    # vectors are integer tuples (u_1, v_1, ..., u_r, v_r) meaning x_k = u_k + v_k*omega
    def vector(self, coords: Sequence[int]):
        return [(Fraction(coords[2 * k]), Fraction(coords[2 * k + 1])) for k in range(self.rank)]

    def form(self, x, y):
        """``Q0(x, y)`` for vectors given as lists of E0-elements."""
        E0 = self.E0
        total = E0.zero()
        for k in range(self.rank):
            for l in range(self.rank):
                total = E0.add(total, E0.mul(E0.mul(x[k], self.gram[k][l]), E0.conj(y[l])))
        return total

    def norm(self, coords: Sequence[int]) -> Fraction:
        v = self.vector(coords)
        val = self.form(v, v)
        assert val[1] == 0
        return val[0]

    def real_form(self) -> Tuple[List[List[int]], int]:
        """``(A, D)`` with ``Q0(x, x) = y^T A y / D`` for integer coordinates ``y``."""
        if self._real_form is None:
            n = 2 * self.rank
            unit = [tuple(int(i == j) for j in range(n)) for i in range(n)]
            diag = [self.norm(e) for e in unit]
            A = [[Fraction(0)] * n for _ in range(n)]
            for i in range(n):
                A[i][i] = diag[i]
                for j in range(i + 1, n):
                    s = tuple(a + b for a, b in zip(unit[i], unit[j]))
                    A[i][j] = A[j][i] = (self.norm(s) - diag[i] - diag[j]) / 2
            D = 1
            for row in A:
                for x in row:
                    D = D * x.denominator // math.gcd(D, x.denominator)
            self._real_form = ([[int(x * D) for x in row] for row in A], D, A)
        A_int, D, _ = self._real_form
        return A_int, D

    def box_bounds(self, max_norm) -> List[int]:
        """Coordinate bounds for all vectors with ``Q0(x, x) <= max_norm``."""
        self.require_definite()
        A_rat = self._rational_form()
        Ainv = mat_inverse(A_rat)
        N = _fr(max_norm)
        return [math.isqrt(math.floor(N * Ainv[i][i])) if N >= 0 else 0
                for i in range(len(A_rat))]

    def _rational_form(self):
        self.real_form()
        return self._real_form[2]


def theta_coefficients(L: HermitianLattice, bound) -> Dict[Fraction, int]:
    """Number of lattice vectors of each norm ``0 <= norm <= bound``.

    Every norm of the form ``k / D`` (``D`` the common denominator of the
    real Gram form) up to the bound gets an entry, including empty classes.
    """
    L.require_definite()
    A, D = L.real_form()
    bound = _fr(bound)
    if bound < 0:
        return {}
    top = math.floor(bound * D)
    counts = _kernels.box_norm_counts(A, L.box_bounds(bound), top)
    return {Fraction(k, D): c for k, c in enumerate(counts)}


def vectors_of_norm(L: HermitianLattice, norm) -> List[Tuple[int, ...]]:
    L.require_definite()
    A, D = L.real_form()
    target = _fr(norm) * D
    if target < 0 or target.denominator != 1:
        return []
    return _kernels.box_enumerate(A, L.box_bounds(norm), int(target))


def enumerate_gram(L0: HermitianLattice, beta: Sequence[Sequence], cap=None) -> List[tuple]:
    """All tuples ``(x_1, ..., x_n)`` of lattice vectors with ``Q0(x_i, x_j) = beta_ij``."""
    L0.require_definite()
    E0 = L0.E0
    beta = [[E0.elem(*e) if isinstance(e, (tuple, list)) else E0.elem(e) for e in row]
            for row in beta]
    n = len(beta)
    for i in range(n):
        for j in range(n):
            if beta[i][j] != E0.conj(beta[j][i]):
                raise InputError("target matrix is not hermitian")
    diag = [beta[i][i][0] for i in range(n)]
    if cap is not None and any(d > _fr(cap) for d in diag):
        raise CapExceeded(f"diagonal entries {diag} exceed the cap {cap}")
    if any(d < 0 for d in diag):
        return []
    candidates = [vectors_of_norm(L0, d) for d in diag]
    vecs = [[L0.vector(c) for c in cand] for cand in candidates]
    out: List[tuple] = []

    def extend(prefix: List[int]):
        i = len(prefix)
        if i == n:
            out.append(tuple(candidates[k][prefix[k]] for k in range(n)))
            return
        for idx, v in enumerate(vecs[i]):
            if all(L0.form(vecs[k][prefix[k]], v) == beta[k][i] for k in range(i)):
                extend(prefix + [idx])

    extend([])
    return out


# ---------------------------------------------------------------------------
# trace identity


def _e0_vec_from(x, E0):
    return [E0.elem(*c) for c in x]


def trace_identity_check(FB: NumberFieldBasis, L0: HermitianLattice, b: Sequence,
                         x: Sequence, y: Sequence, pairing: str = "dual") -> dict:
    """Compare ``tr_{E/E0}(Q(xi, eta) b)`` with ``Tr(Q(x, y) B)`` exactly.

    ``x`` and ``y`` are g-tuples of vectors in ``E0^rank`` (lists of E0 pairs).
    With ``pairing="dual"`` the vectors are assembled as ``xi = sum s_i x_i``
    and ``B`` maps the dual basis to the integral basis; ``"integral"`` uses
    ``xi = sum r_i x_i`` with ``B`` mapping the integral basis to the dual
    one; ``"mixed"`` combines ``xi = sum r_i x_i`` with the dual-to-integral
    matrix.
    """
    F = FB.field
    E0 = L0.E0
    E = CompositeField(E0, F)
    g = FB.degree
    if pairing == "dual":
        coeffs, B = FB.s, mult_matrix(b, FB, "s", "r")
    elif pairing == "integral":
        coeffs, B = FB.r, mult_matrix(b, FB, "r", "s")
    elif pairing == "mixed":
        coeffs, B = FB.r, mult_matrix(b, FB, "s", "r")
    else:
        raise ValueError("pairing must be 'dual', 'integral' or 'mixed'")
    xs = [_e0_vec_from(xi, E0) for xi in x]
    ys = [_e0_vec_from(yi, E0) for yi in y]

    def assemble(vs):
        out = []
        for k in range(L0.rank):
            acc = E.zero()
            for i in range(g):
                acc = E.add(acc, E.mul(E.from_F(coeffs[i]), E.from_E0(vs[i][k])))
            out.append(acc)
        return out

    xi_v, eta_v = assemble(xs), assemble(ys)
    Q = E.zero()
    for k in range(L0.rank):
        for l in range(L0.rank):
            term = E.mul(E.mul(xi_v[k], E.from_E0(L0.gram[k][l])), E.conj(eta_v[l]))
            Q = E.add(Q, term)
    lhs = E.trace_to_E0(E.mul(Q, E.from_F(FB.from_r_coords(b))))
    rhs = E0.zero()
    for i in range(g):
        for j in range(g):
            rhs = E0.add(rhs, E0.mul(L0.form(xs[i], ys[j]), (B[j][i], Fraction(0))))
    return {"lhs": [str(c) for c in lhs], "rhs": [str(c) for c in rhs], "equal": lhs == rhs}


def random_trace_samples(FB: NumberFieldBasis, L0: HermitianLattice, samples: int,
                         seed: int = 0, size: int = 5, pairing: str = "dual") -> List[dict]:
    rng = random.Random(seed)
    g = FB.degree

    def rnd():
        return Fraction(rng.randint(-size, size), rng.randint(1, size))

    out = []
    for _ in range(samples):
        b = [rnd() for _ in range(g)]
        x = [[(rnd(), rnd()) for _ in range(L0.rank)] for _ in range(g)]
        y = [[(rnd(), rnd()) for _ in range(L0.rank)] for _ in range(g)]
        out.append(trace_identity_check(FB, L0, b, x, y, pairing))
    return out


# ---------------------------------------------------------------------------
# grouping of Gram matrices


def totally_positive_elements(FB: NumberFieldBasis, max_trace: int,
                              include_zero: bool = True) -> List[Tuple[int, ...]]:
    """Integral elements (r-coordinates) that are totally positive with trace <= max_trace."""
    F = FB.field
    g = FB.degree
    Uinv = np.linalg.inv(np.array(FB.U, dtype=float))
    bounds = [int(math.floor(sum(abs(Uinv[i][t]) for t in range(g)) * max_trace + 1e-9))
              for i in range(g)]
    out = []
    for c in itertools.product(*[range(-b, b + 1) for b in bounds]):
        x = FB.from_r_coords(c)
        if all(v == 0 for v in c):
            if include_zero:
                out.append(tuple(c))
            continue
        if F.trace(x) <= max_trace and F.is_totally_positive(x):
            out.append(tuple(c))
    return sorted(out, key=lambda c: (F.trace(FB.from_r_coords(c)), c))


def diagonal_caps(FB: NumberFieldBasis, b: Sequence) -> List[Fraction]:
    """Upper bounds for ``Q0(x_i, x_i)`` over all ``x`` with ``Q(sum r_i x_i) = b``."""
    F = FB.field
    bb = FB.from_r_coords(b)
    lam = F.embeddings(bb)
    if any(v < -1e-12 for v in lam):
        return [Fraction(-1)] * FB.degree
    Uinv = np.linalg.inv(np.array(FB.U, dtype=float))
    caps = []
    for i in range(FB.degree):
        c = sum(abs(Uinv[i][t]) * math.sqrt(max(lam[t], 0.0)) for t in range(FB.degree)) ** 2
        caps.append(Fraction(c * (1 + 1e-9) + 1e-9).limit_denominator(10 ** 6))
    return caps


def _offdiag_module_basis(L0: HermitianLattice) -> List[Tuple[Fraction, Fraction]]:
    """A Z-basis of the module of values ``Q0(x, y)`` for lattice vectors x, y."""
    E0 = L0.E0
    basis_vals = [E0.elem(1, 0), E0.elem(0, 1)]
    gens = []
    for k in range(L0.rank):
        for l in range(L0.rank):
            for a in basis_vals:
                for c in basis_vals:
                    gens.append(E0.mul(E0.mul(a, L0.gram[k][l]), E0.conj(c)))
    den = 1
    for g in gens:
        for x in g:
            den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [(int(g[0] * den), int(g[1] * den)) for g in gens]
    v1, v2 = _hnf2(ints)
    return [(Fraction(v1[0], den), Fraction(v1[1], den)),
            (Fraction(v2[0], den), Fraction(v2[1], den))]


def _hnf2(vectors: List[Tuple[int, int]]) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """Basis ``((a, b), (0, d))`` of the Z-span of integer vectors in Z^2 (assumed full rank)."""
    # gcd of first coordinates with the combination that realizes it
    a, b = 0, 0
    first = (0, 0)
    for x, y in vectors:
        if x == 0:
            continue
        if first == (0, 0):
            first = (x, y)
            continue
        g, s, t = _xgcd(first[0], x)
        first = (g, s * first[1] + t * y)
    # second coordinates of lattice vectors with first coordinate 0
    d = 0
    a = first[0]
    for x, y in vectors:
        if a:
            q = x // a
            d = math.gcd(d, y - q * first[1]) if x % a == 0 else d
        else:
            d = math.gcd(d, y)
    # close under the relation between generators: combinations with zero first coordinate
    if a:
        for (x1, y1), (x2, y2) in itertools.combinations(vectors + [first], 2):
            g = math.gcd(x1, x2)
            if g:
                d = math.gcd(d, (x2 // g) * y1 - (x1 // g) * y2)
        for x, y in vectors:
            d = math.gcd(d, (x // a) * first[1] - y) if x % a == 0 else d
    if a < 0:
        first = (-first[0], -first[1])
        a = -a
    if d == 0:
        raise ValueError("module is not of full rank")
    return (first[0], first[1] % d), (0, abs(d))


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, s, t = _xgcd(b, a % b)
    return g, t, s - (a // b) * t


def _elements_up_to_norm(E0: ImagQuadratic, basis, max_norm: Fraction):
    """All ``m1*v1 + m2*v2`` with norm at most ``max_norm``."""
    v1, v2 = basis
    n11 = E0.norm(v1)
    n22 = E0.norm(v2)
    n12 = (E0.norm(E0.add(v1, v2)) - n11 - n22) / 2
    A = [[n11, n12], [n12, n22]]
    Ainv = mat_inverse(A)
    out = []
    if max_norm < 0:
        return out
    b1 = math.isqrt(math.floor(max_norm * Ainv[0][0]))
    b2 = math.isqrt(math.floor(max_norm * Ainv[1][1]))
    for m1 in range(-b1, b1 + 1):
        for m2 in range(-b2, b2 + 1):
            c = E0.add((v1[0] * m1, v1[1] * m1), (v2[0] * m2, v2[1] * m2))
            if E0.norm(c) <= max_norm:
                out.append(c)
    return out


def r_beta_r(FB: NumberFieldBasis, E0: ImagQuadratic, beta) -> Vec:
    """``t(r) beta r`` for a hermitian ``beta``; it lies in F."""
    F = FB.field
    g = FB.degree
    total = F.zero()
    for i in range(g):
        total = F.add(total, F.scale(F.mul(FB.r[i], FB.r[i]), beta[i][i][0]))
        for j in range(i + 1, g):
            total = F.add(total, F.scale(F.mul(FB.r[i], FB.r[j]), E0.trace(beta[i][j])))
    return total


def grouping_betas(FB: NumberFieldBasis, L0: HermitianLattice, b: Sequence,
                   caps: Optional[Sequence] = None) -> List[List[List[Tuple[Fraction, Fraction]]]]:
    """Hermitian ``g x g`` matrices with lattice-realizable entries and ``t(r) beta r = b``."""
    E0 = L0.E0
    g = FB.degree
    caps = diagonal_caps(FB, b) if caps is None else [_fr(c) for c in caps]
    target = FB.from_r_coords(b)
    norms = theta_coefficients(L0, max(max(caps), Fraction(0))) if max(caps) >= 0 else {}
    diag_options = [[n for n, c in sorted(norms.items()) if c and n <= caps[i]] for i in range(g)]
    off_basis = _offdiag_module_basis(L0)
    out = []
    for diag in itertools.product(*diag_options):
        pairs = [(i, j) for i in range(g) for j in range(i + 1, g)]
        options = [_elements_up_to_norm(E0, off_basis, diag[i] * diag[j]) for i, j in pairs]
        for offs in itertools.product(*options):
            beta = [[E0.zero() for _ in range(g)] for _ in range(g)]
            for i in range(g):
                beta[i][i] = (diag[i], Fraction(0))
            for (i, j), c in zip(pairs, offs):
                beta[i][j] = c
                beta[j][i] = E0.conj(c)
            if r_beta_r(FB, E0, beta) == target:
                out.append(beta)
    return out


def _xi_key(FB: NumberFieldBasis, L0: HermitianLattice, xs: Sequence[Sequence[int]]):
    """``sum r_i x_i`` as exact coordinates in (power basis of F) x {1, omega}."""
    F = FB.field
    E = CompositeField(L0.E0, F)
    key = []
    for k in range(L0.rank):
        acc = E.zero()
        for i, x in enumerate(xs):
            xk = (Fraction(x[2 * k]), Fraction(x[2 * k + 1]))
            acc = E.add(acc, E.mul(E.from_F(FB.r[i]), E.from_E0(xk)))
        key.append(acc)
    return tuple(key)


def _composite_form(FB: NumberFieldBasis, L0: HermitianLattice, xi_vec):
    E = CompositeField(L0.E0, FB.field)
    Q = E.zero()
    for k in range(L0.rank):
        for l in range(L0.rank):
            Q = E.add(Q, E.mul(E.mul(xi_vec[k], E.from_E0(L0.gram[k][l])), E.conj(xi_vec[l])))
    return Q


def direct_count(FB: NumberFieldBasis, L0: HermitianLattice, b: Sequence) -> List[tuple]:
    """Vectors of ``L = O_F (x) L0`` with ``Q(xi, xi) = b``, found through the trace form."""
    L0.require_definite()
    F = FB.field
    g = FB.degree
    n = 2 * L0.rank * g
    target_F = FB.from_r_coords(b)
    tr_b = F.trace(target_F)

    def coords_to_xs(c):
        return [c[i * 2 * L0.rank:(i + 1) * 2 * L0.rank] for i in range(g)]

    def trace_norm(c):
        Q = _composite_form(FB, L0, _xi_key(FB, L0, coords_to_xs(c)))
        return F.trace(Q[0])

    unit = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    diag = [trace_norm(e) for e in unit]
    A = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        A[i][i] = diag[i]
        for j in range(i + 1, n):
            s = tuple(a + c for a, c in zip(unit[i], unit[j]))
            A[i][j] = A[j][i] = (trace_norm(s) - diag[i] - diag[j]) / 2
    D = 1
    for row in A:
        for x in row:
            D = D * x.denominator // math.gcd(D, x.denominator)
    A_int = [[int(x * D) for x in row] for row in A]
    if tr_b < 0:
        return []
    tgt = tr_b * D
    if tgt.denominator != 1:
        return []
    Ainv = mat_inverse(A)
    bounds = [math.isqrt(math.floor(tr_b * Ainv[i][i])) for i in range(n)]
    out = []
    for c in _kernels.box_enumerate(A_int, bounds, int(tgt)):
        xs = coords_to_xs(c)
        Q = _composite_form(FB, L0, _xi_key(FB, L0, xs))
        if all(v == 0 for v in Q[1]) and Q[0] == target_F:
            out.append(tuple(tuple(x) for x in xs))
    return out


def beta_grouping_check(FB: NumberFieldBasis, L0: HermitianLattice, b: Sequence,
                        bound=None) -> dict:
    """Compare ``sum_beta #I_beta(L0)`` with a direct count of ``I_b(L)``."""
    L0.require_definite()
    caps = diagonal_caps(FB, b)
    if bound is not None and max(caps) > _fr(bound):
        raise CapExceeded(f"diagonal cap {float(max(caps)):.4f} exceeds the bound {bound}")
    betas = grouping_betas(FB, L0, b, caps)
    grouped = []
    per_beta = []
    for beta in betas:
        sols = enumerate_gram(L0, beta)
        per_beta.append(len(sols))
        grouped.extend(sols)
    direct = direct_count(FB, L0, b)
    keys_grouped = [_xi_key(FB, L0, xs) for xs in grouped]
    keys_direct = {_xi_key(FB, L0, xs) for xs in direct}
    injective = len(set(keys_grouped)) == len(keys_grouped)
    same_image = set(keys_grouped) == keys_direct
    return {
        "b": [str(c) for c in b],
        "trace": str(FB.field.trace(FB.from_r_coords(b))),
        "caps": [str(c) for c in caps],
        "beta_count": len(betas),
        "grouped_count": len(grouped),
        "direct_count": len(direct),
        "injective": injective,
        "same_image": same_image,
        "equal": len(grouped) == len(direct) and injective and same_image,
        "per_beta": per_beta,
    }


# ---------------------------------------------------------------------------
# finite group models


Perm = Tuple[int, ...]


def compose(g: Perm, h: Perm) -> Perm:
    """``(g h)(i) = g(h(i))``."""
    return tuple(g[i] for i in h)


def invert(g: Perm) -> Perm:
    out = [0] * len(g)
    for i, gi in enumerate(g):
        out[gi] = i
    return tuple(out)


def closure(gens: Iterable[Perm], degree: int) -> List[Perm]:
    """The group generated by ``gens`` (breadth-first closure), sorted."""
    ident = tuple(range(degree))
    seen = {ident}
    frontier = [ident]
    gens = list(gens)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = compose(g, x)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return sorted(seen)


def cyclic_group(n: int) -> List[Perm]:
    return closure([tuple((i + 1) % n for i in range(n))], n)


def dihedral_group(n: int) -> List[Perm]:
    rot = tuple((i + 1) % n for i in range(n))
    ref = tuple((-i) % n for i in range(n))
    return closure([rot, ref], n)


def symmetric_group(n: int) -> List[Perm]:
    return sorted(itertools.permutations(range(n)))


def alternating_group(n: int) -> List[Perm]:
    return [p for p in symmetric_group(n) if _kernels.inversion_parity(p) == 0]


@dataclass
class FiniteActionModel:
    """A permutation group acting on ``D = group x labels`` by left multiplication."""

    group: List[Perm]
    gamma0: List[Perm]
    gamma_xi: List[Perm]
    points: List[Tuple[int, int]]
    D0: frozenset
    Dxi: frozenset
    action: Optional[Callable] = None
    index: Dict[Perm, int] = field(default_factory=dict)

    def __post_init__(self):
        self.index = {g: i for i, g in enumerate(self.group)}

    def act(self, g: Perm, z):
        if self.action is not None:
            return self.action(g, z)
        gi, lab = z
        return (self.index[compose(g, self.group[gi])], lab)

    def orbit(self, sub: Sequence[Perm], z) -> frozenset:
        return frozenset(self.act(h, z) for h in sub)


def check_free(model: FiniteActionModel):
    ident = tuple(range(len(model.group[0])))
    for g in model.group:
        if g == ident:
            continue
        for z in model.points:
            if model.act(g, z) == z:
                raise NonFreeAction(f"element {g} fixes the point {z}")


def _random_subgroup(group: List[Perm], rng: random.Random) -> List[Perm]:
    k = rng.choice([0, 1, 1, 2])
    gens = [rng.choice(group) for _ in range(k)]
    return closure(gens, len(group[0]))


def _random_union_of_orbits(model: FiniteActionModel, sub, rng: random.Random) -> frozenset:
    orbits = []
    seen = set()
    for z in model.points:
        if z not in seen:
            o = model.orbit(sub, z)
            seen |= o
            orbits.append(o)
    chosen = [o for o in orbits if rng.random() < 0.5] or [rng.choice(orbits)]
    return frozenset().union(*chosen)


GROUP_MENU = [
    ("C1", lambda: cyclic_group(1)), ("C2", lambda: cyclic_group(2)),
    ("C4", lambda: cyclic_group(4)), ("C6", lambda: cyclic_group(6)),
    ("C12", lambda: cyclic_group(12)), ("D3", lambda: dihedral_group(3)),
    ("D4", lambda: dihedral_group(4)), ("D6", lambda: dihedral_group(6)),
    ("D12", lambda: dihedral_group(12)), ("S3", lambda: symmetric_group(3)),
    ("A4", lambda: alternating_group(4)), ("S4", lambda: symmetric_group(4)),
]


def random_model(rng: random.Random) -> Tuple[str, FiniteActionModel]:
    name, make = rng.choice(GROUP_MENU)
    group = make()
    labels = rng.randint(1, 2)
    points = [(i, lab) for i in range(len(group)) for lab in range(labels)]
    gamma0 = _random_subgroup(group, rng)
    gamma_xi = _random_subgroup(group, rng)
    model = FiniteActionModel(group, gamma0, gamma_xi, points, frozenset(), frozenset())
    model.D0 = _random_union_of_orbits(model, gamma0, rng)
    model.Dxi = _random_union_of_orbits(model, gamma_xi, rng)
    return name, model


def double_cosets(group: List[Perm], left: List[Perm], right: List[Perm]) -> List[Perm]:
    """One representative (the smallest element) of every double coset."""
    seen = set()
    reps = []
    for g in group:
        if g in seen:
            continue
        dc = {compose(compose(h, g), k) for h in left for k in right}
        seen |= dc
        reps.append(min(dc))
    return reps


def fiber_product_decomposition(model: FiniteActionModel) -> dict:
    """Check that ``(z, gamma) -> (Gamma0 z, Gamma_xi gamma^-1 z)`` is a bijection.

    The source is the disjoint union over double cosets of
    ``(D0 ∩ gamma D_xi) / (Gamma0 ∩ gamma Gamma_xi gamma^-1)`` and the target is
    the fiber product of ``Gamma0 \\ D0`` and ``Gamma_xi \\ D_xi`` over ``Gamma \\ D``.
    """
    check_free(model)
    G, G0, Gx = model.group, model.gamma0, model.gamma_xi
    for h in G0:
        if any(model.act(h, z) not in model.D0 for z in model.D0):
            raise ValueError("D0 is not stable under Gamma0")
    for h in Gx:
        if any(model.act(h, z) not in model.Dxi for z in model.Dxi):
            raise ValueError("D_xi is not stable under Gamma_xi")
    # target
    target = set()
    for z in model.D0:
        gz = model.orbit(G, z)
        for w in model.Dxi:
            if w in gz:
                target.add((model.orbit(G0, z), model.orbit(Gx, w)))
    # source and map
    reps = double_cosets(G, G0, Gx)
    well_defined = True
    images = []
    source_size = 0
    for gamma in reps:
        ginv = invert(gamma)
        conj_sub = {compose(compose(gamma, k), ginv) for k in Gx}
        stab = [h for h in G0 if h in conj_sub]
        gamma_Dxi = {model.act(gamma, w) for w in model.Dxi}
        piece = [z for z in model.D0 if z in gamma_Dxi]
        seen = set()
        for z in piece:
            if z in seen:
                continue
            cls = model.orbit(stab, z)
            seen |= cls
            source_size += 1
            vals = {(model.orbit(G0, y), model.orbit(Gx, model.act(ginv, y))) for y in cls}
            if len(vals) != 1:
                well_defined = False
            images.append(next(iter(vals)))
    injective = len(set(images)) == len(images)
    surjective = set(images) == target
    return {"group_order": len(G), "gamma0_order": len(G0), "gamma_xi_order": len(Gx),
            "double_cosets": len(reps), "source_size": source_size,
            "target_size": len(target), "well_defined": well_defined,
            "injective": injective, "surjective": surjective,
            "bijection": well_defined and injective and surjective}


def fiber_trials(trials: int, seed: int) -> List[dict]:
    rng = random.Random(seed)
    out = []
    for t in range(trials):
        name, model = random_model(rng)
        rep = fiber_product_decomposition(model)
        rep["trial"] = t
        rep["group"] = name
        out.append(rep)
    return out
