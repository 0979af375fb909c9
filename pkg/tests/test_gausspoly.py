import cmath
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from kmlab import gausspoly as gp
from kmlab.errors import NonIntegrable, NotUnitary, ScaleMismatch, UnsupportedScale, ZeroScale
from kmlab.field import I_QI2, INV_SQRT2_QI2, QI2, Coefficient
from kmlab.gausspoly import PolyGaussian

phi0 = PolyGaussian.gaussian(1)
z = PolyGaussian.variable(1, 0)
zbar = PolyGaussian.variable(1, 0, conjugated=True)


def quad_plane(fun, radius):
    """Integral of a complex function over the disc of the given radius (polar grid)."""
    def part(which):
        return integrate.dblquad(lambda r, t: which(fun(r * cmath.exp(1j * t))) * r,
                                 0, 2 * math.pi, 0, radius, epsabs=1e-13, epsrel=1e-11)[0]
    return part(lambda w: w.real) + 1j * part(lambda w: w.imag)


@pytest.mark.parametrize("r", range(11))
def test_radial_moments_are_factorial_over_pi_power(r):
    f = PolyGaussian.monomial(1, [r, r])
    assert gp.moment_integral(f) == Coefficient.pi_power(-r, math.factorial(r))


@pytest.mark.parametrize("a,b", [(0, 1), (2, 0), (3, 5)])
def test_unbalanced_moments_vanish(a, b):
    assert gp.moment_integral(PolyGaussian.monomial(1, [a, b])).is_zero()


def test_moments_against_quadrature():
    rng = random.Random(7)
    for _ in range(50):
        c = rng.uniform(0.5, 2.0)
        terms = {(a, b): complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
                 for a, b in [(rng.randint(0, 3), rng.randint(0, 3)) for _ in range(3)]}
        f = PolyGaussian(1, [c], terms, exact=False)
        got = gp.moment_integral(f)
        want = quad_plane(lambda w: f.evaluate([w]), math.sqrt(45 / (math.pi * c)))
        assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


def test_wirtinger_derivative_against_finite_differences():
    f = PolyGaussian(1, [1.3], {(1, 2): 0.7 - 0.2j, (0, 1): 1.1}, exact=False)
    w, h = 0.3 - 0.4j, 1e-6
    dx = (f.evaluate([w + h]) - f.evaluate([w - h])) / (2 * h)
    dy = (f.evaluate([w + 1j * h]) - f.evaluate([w - 1j * h])) / (2 * h)
    assert gp.derivative(f, 0).evaluate([w]) == pytest.approx((dx - 1j * dy) / 2, abs=1e-8)
    assert gp.derivative(f, 0, True).evaluate([w]) == pytest.approx((dx + 1j * dy) / 2, abs=1e-8)


def test_creation_operators_on_phi0():
    # the barred operator multiplies phi0 by 2 conj(z); the unbarred one by 2 z
    assert gp.apply_D(phi0, 0, conjugated=True) == zbar.scale_by(2)
    assert gp.apply_D(phi0, 0) == z.scale_by(2)


def test_apply_D_needs_the_standard_scale():
    with pytest.raises(UnsupportedScale):
        gp.apply_D(PolyGaussian.gaussian(1, [2]), 0)


@pytest.mark.parametrize("a,b", [(a, b) for a in range(7) for b in range(7 - a)])
def test_fourier_twice_is_parity(a, b):
    f = PolyGaussian.monomial(1, [a, b])
    assert gp.fourier_transform(gp.fourier_transform(f, 0), 0) == gp.parity(f)


def test_fourier_fixes_phi0_and_rotates_z():
    assert gp.fourier_transform(phi0, 0) == phi0
    assert gp.fourier_transform(z, 0) == z.scale_by(-I_QI2)


@pytest.mark.parametrize("exps", [(0, 1), (1, 1), (2, 0)])
def test_fourier_against_quadrature(exps):
    f = PolyGaussian.monomial(1, list(exps), exact=False)
    fh = gp.fourier_transform(f, 0)
    y = 0.35 - 0.2j
    want = quad_plane(lambda x: f.evaluate([x]) * cmath.exp(-2j * math.pi * (y * x.conjugate()).real),
                      5.0)
    assert fh.evaluate([y]) == pytest.approx(want, abs=1e-9)


def test_numeric_fourier_of_a_wide_gaussian():
    g = gp.fourier_transform(PolyGaussian.gaussian(1, [0.5], exact=False), 0)
    assert g.scales[0] == pytest.approx(2.0)
    assert g.evaluate([0]) == pytest.approx(2.0)


def test_rescale_and_integral():
    f = gp.rescale(PolyGaussian.monomial(1, [1, 1]), 0, INV_SQRT2_QI2)
    assert f.scales[0] == QI2(Fraction(1, 2))
    # int |z|^2/2 exp(-pi |z|^2 / 2) = (1/2) * 1!/(pi (1/2)^2)
    assert gp.moment_integral(f) == Coefficient.pi_power(-1, 2)
    with pytest.raises(ZeroScale):
        gp.rescale(phi0, 0, 0)


def test_scale_mismatch_and_nonintegrable_scale():
    with pytest.raises(ScaleMismatch):
        z + PolyGaussian.monomial(1, [0, 1], scales=[2])
    with pytest.raises(NonIntegrable):
        PolyGaussian.gaussian(1, [-1])


def test_unitary_substitution_preserves_phi0_and_rejects_non_unitary():
    U = gp.cayley_unitary([[QI2(0, 1), QI2(1, 1)], [QI2(-1, 1), QI2(0, 2)]])
    assert gp.is_unitary_matrix(U)
    g = PolyGaussian.gaussian(2)
    assert gp.unitary_substitution(g, [0, 1], U) == g
    with pytest.raises(NotUnitary):
        gp.linear_substitution(g, [(0, 1)], [[1, 1], [0, 1]])


def test_unitary_substitution_matches_pointwise_evaluation():
    U = gp.cayley_unitary([[QI2(0, 1), QI2(2, -1)], [QI2(-2, -1), QI2(0)]])
    f = PolyGaussian(2, None, {(1, 0, 0, 2): QI2(1, 1), (0, 1, 1, 0): QI2(3)})
    g = gp.unitary_substitution(f, [0, 1], U)
    Un = np.array([[complex(x) for x in row] for row in U])
    w = np.array([0.2 + 0.1j, -0.4 + 0.3j])
    assert g.evaluate(w) == pytest.approx(f.evaluate(Un @ w), abs=1e-12)


def test_tensor_and_restrict():
    t = gp.tensor(z, zbar)
    assert t.num_vars == 2
    assert gp.restrict_zero(gp.tensor(phi0, zbar), [0]) == zbar
    assert gp.restrict_zero(t, [0]).is_zero()


def test_json_round_trip_exact_and_numeric():
    f = PolyGaussian(2, None, {(1, 0, 2, 2): Coefficient.pi_power(-1, QI2(1, 2, 0, 1, 3))})
    assert PolyGaussian.from_json(f.to_json()) == f
    g = f.to_numeric()
    assert PolyGaussian.from_json(g.to_json()).evaluate([0.1, 0.2j]) == pytest.approx(
        g.evaluate([0.1, 0.2j]))


coef = st.integers(-5, 5)
mono = st.tuples(*[st.integers(0, 3)] * 4)
polys = st.dictionaries(mono, coef, max_size=5).map(
    lambda d: PolyGaussian(2, None, {m: QI2(c) for m, c in d.items() if c}))


@settings(max_examples=60, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(f, g, h):
    assert f + g == g + f
    assert gp.pointwise_product(f, g + h) == gp.pointwise_product(f, g) + gp.pointwise_product(f, h)


@settings(max_examples=40, deadline=None)
@given(polys)
def test_fourier_is_linear_and_inverts_to_parity(f):
    F = lambda u: gp.fourier_transform(gp.fourier_transform(u, 0), 1)
    assert F(F(f)) == gp.parity(f)
    assert F(f + f) == F(f) + F(f)
