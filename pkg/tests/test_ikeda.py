import math
import random
from fractions import Fraction

import pytest
from scipy import integrate

from kmlab import howe_km as H
from kmlab import ikeda as I
from kmlab.errors import DomainError, UnsupportedScale
from kmlab.field import QI2, Coefficient
from kmlab.gausspoly import PolyGaussian


def radial_quad(f, weight):
    """Integral over C of f(z/sqrt2) exp(-pi weight |z|^2) for radial f (numeric)."""
    g = f.to_numeric()
    h = lambda r: (g.evaluate([r / math.sqrt(2)]) * math.exp(math.pi * r * r / 2)).real
    return integrate.quad(lambda r: 2 * math.pi * r * h(r) * math.exp(-math.pi * weight * r * r),
                          0, 12, epsabs=1e-13, limit=200)[0]


@pytest.mark.parametrize("k", range(1, 11))
def test_f_k_integral_vanishes(k):
    rep = I.verify_fk_vanishing(k)
    assert rep["zero"] and rep["weighted_zero"]
    assert rep["binomial_sum"] == 0 and rep["expansion_matches_binomial"]


def test_f_0_values_under_the_three_normalizations():
    rep = I.verify_fk_vanishing(0)
    assert (rep["value"], rep["weighted_value"], rep["own_gaussian_value"]) == ("(1)", "(1/2)", "(2)")
    assert not rep["zero"]


@pytest.mark.parametrize("k,value", [(1, "(4)*pi^-1"), (2, "(16)*pi^-2")])
def test_own_gaussian_rescaling_is_not_zero(k, value):
    # rescaling h phi_0 together with its own Gaussian loses the cancellation
    assert I.verify_fk_vanishing(k)["own_gaussian_value"] == value


@pytest.mark.parametrize("k,t", [(1, 2), (2, 2), (3, Fraction(3, 2)), (2, Fraction(1, 3))])
def test_weight_only_rescaling(k, t):
    # closed form (-1)^k k!/t (1 - 1/t)^k (2/pi)^k, compared with quadrature too
    val = I.fk_weighted_integral(k, t)
    t = Fraction(t)
    want = Fraction((-1) ** k * math.factorial(k)) / t * (1 - 1 / t) ** k * 2 ** k
    assert val == Coefficient.pi_power(-k, QI2(want))
    assert complex(val).real == pytest.approx(radial_quad(H.f_k(k), float(t)), abs=1e-9)


@pytest.mark.parametrize("k,lam", [(2, 3), (4, QI2(1, 1)), (3, QI2(0, 0, 1))])
def test_simultaneous_rescaling_keeps_zero(k, lam):
    assert I.verify_fk_rescaled(k, lam).is_zero()


@pytest.mark.parametrize("a,b", [(a, b) for a in range(7) for b in range(7) if a != b])
def test_F_ab_integral_vanishes_with_gap_witness(a, b):
    rep = I.verify_Fab_vanishing(a, b)
    assert rep["zero"] and rep["gap_witness"]


def test_diagonal_F_ab_is_a_domain_error():
    with pytest.raises(DomainError):
        I.verify_Fab_vanishing(2, 2)


def test_f_k_quadrature_oracle():
    for k in (1, 2, 3):
        assert radial_quad(H.f_k(k), 1.0) == pytest.approx(0.0, abs=1e-9)
    assert radial_quad(H.f_k(0), 1.0) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("p,q,terms,c1,c2", [(2, 1, 4, 2, 2), (3, 1, 36, 24, 12), (2, 2, 16, 10, 6)])
def test_ikeda_kills_km(p, q, terms, c1, c2):
    rep = I.verify_ikeda_kills(p, q, per_term=True)
    assert rep["result"] == "zero"
    assert (rep["term_count"], rep["case1_count"], rep["case2_count"]) == (terms, c1, c2)
    assert rep["unclassified"] == 0 and rep["per_term_zero"]
    for cert in rep["certificate"]:
        assert I.line_factor(cert["a"], cert["b"]).is_zero()
        assert cert["case"] == (1 if cert["a"] != cert["b"] else 2)


def test_km_itself_is_not_zero():
    assert not H.km_schwartz(2, 1).is_zero()


def test_split_frame_rules():
    fr = I.SplitFrame(5, 2)
    assert fr.pairs == [(0, 4), (1, 3)] and fr.complement_slots == [2]
    with pytest.raises(DomainError):
        I.SplitFrame(3, 2)


def test_ikeda_map_of_phi0_is_phi0():
    phi = PolyGaussian.gaussian(3)
    assert I.ikeda_map(phi, I.SplitFrame(3, 1)) == PolyGaussian.gaussian(1)


def test_mixed_model_slice_equals_ikeda_map():
    assert all(r["equal"] for r in I.mixed_model_identity(10, seed=3))


def test_rank_support_report():
    fr = I.SplitFrame(3, 1)
    f_hat = I.mixed_model(H.km_schwartz(2, 1), fr, 2)
    assert I.rank_support_report(f_hat, fr, 2)["slice_zero"]
    with pytest.raises(DomainError):
        I.rank_support_report(f_hat, I.SplitFrame(4, 2), 2)


def test_partial_fourier_needs_scale_one():
    with pytest.raises(UnsupportedScale):
        I.partial_fourier(PolyGaussian.gaussian(2, [2, 1]), [0])


def test_partial_fourier_block_twice_is_parity():
    rng = random.Random(5)
    for _ in range(5):
        f = I.random_polygaussian(3, rng)
        assert I.fourier_parity_check(f, [0, 2])
