import cmath
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from kmlab.field import (INV_PI, INV_SQRT2_QI2, ONE, PI, QI2, SQRT2_QI2, Coefficient)

small = st.fractions(min_value=-20, max_value=20, max_denominator=12)
qi2 = st.builds(QI2, small, small, small, small)


@given(qi2, qi2)
def test_product_matches_complex_numbers(x, y):
    assert cmath.isclose(complex(x * y), complex(x) * complex(y), rel_tol=1e-9, abs_tol=1e-9)


@given(qi2)
def test_nonzero_elements_are_invertible(x):
    if x.is_zero():
        with pytest.raises(ZeroDivisionError):
            x.inverse()
    else:
        assert x * x.inverse() == 1


@given(qi2, qi2)
def test_conjugation_is_a_ring_map(x, y):
    assert (x * y).conjugate() == x.conjugate() * y.conjugate()
    assert (x + y).sqrt2_conjugate() == x.sqrt2_conjugate() + y.sqrt2_conjugate()


def test_sqrt2_squares_to_two():
    assert SQRT2_QI2 * SQRT2_QI2 == 2
    assert INV_SQRT2_QI2 * SQRT2_QI2 == 1


def test_normal_form_reduces_denominators():
    assert QI2(2, 4, 6, 8, 4) == QI2(Fraction(1, 2), 1, Fraction(3, 2), 2)
    assert QI2(0, 0, 0, 0, 7).den == 1


@pytest.mark.parametrize("k", [-3, 0, 2])
def test_pi_grading(k):
    c = Coefficient.pi_power(k, 3)
    assert (c * PI).parts == {k + 1: QI2(3)}
    assert c * c.inverse() == ONE


def test_multi_grade_coefficient_has_no_inverse():
    with pytest.raises(ValueError):
        (ONE + PI).inverse()


def test_json_round_trip():
    c = Coefficient({-2: QI2(1, 2, 3, 4, 5), 1: QI2(0, 1)})
    assert Coefficient.from_json(c.to_json()) == c
    assert complex(INV_PI) == pytest.approx(1 / cmath.pi)
