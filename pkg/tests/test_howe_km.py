import itertools
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from kmlab import howe_km as H
from kmlab import ikeda
from kmlab.errors import ResourceLimit
from kmlab.field import QI2, Coefficient
from kmlab.gausspoly import PolyGaussian, apply_D


def inversion_sign(seq):
    """Sign of the permutation sorting ``seq`` (quadratic count, independent of the kernels)."""
    inv = sum(1 for i, j in itertools.combinations(range(len(seq)), 2) if seq[i] > seq[j])
    return -1 if inv % 2 else 1


# --- Laguerre family -------------------------------------------------------

@pytest.mark.parametrize("k", range(13))
def test_closed_form_matches_recursion(k):
    assert H.laguerre_g(k, "closed") == H.laguerre_g(k, "recursive")


@pytest.mark.parametrize("k", range(9))
def test_closed_form_against_classical_laguerre(k):
    # g_k(x) = (-1)^k k! L_k(x) as a polynomial in x = |w|^2
    x = sympy.Symbol("x")
    poly = sympy.Poly(sympy.expand((-1) ** k * sympy.factorial(k) * sympy.laguerre(k, x)), x)
    want = [int(poly.coeff_monomial(x ** r)) for r in range(k + 1)]
    assert H.laguerre_coefficients(k) == want


@pytest.mark.parametrize("k", range(8))
def test_normalized_f_k_is_g_k(k):
    assert H.normalized_f_k(k) == H.laguerre_g(k)


def test_small_F_ab_by_hand():
    one = PolyGaussian.gaussian(1)
    assert H.F_ab(0, 0) == one
    assert H.F_ab(1, 1) == PolyGaussian(1, None, {(1, 1): QI2(4),
                                                  (0, 0): Coefficient.pi_power(-1, -2)})
    assert H.F_ab(2, 1) == PolyGaussian(1, None, {(2, 1): QI2(8),
                                                  (1, 0): Coefficient.pi_power(-1, -8)})
    assert H.f_k(3) == H.F_ab(3, 3)


@pytest.mark.parametrize("a,b", [(0, 3), (4, 1), (2, 5)])
def test_mu_of_F_ab_is_the_exponent_gap(a, b):
    assert H.mu(H.F_ab(a, b)) == b - a


polys = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)),
                        st.integers(-4, 4), max_size=4).map(
    lambda d: PolyGaussian(1, None, {m: QI2(c) for m, c in d.items() if c}))


@settings(max_examples=50, deadline=None)
@given(polys)
def test_displayed_composite_operator(f):
    composite = apply_D(apply_D(f, 0), 0, conjugated=True)
    assert H.E_display(f) == composite


# --- wedge algebra ---------------------------------------------------------

def test_wedge_relations():
    a = H.WedgeWord((H.xi(1, 1),))
    b = H.WedgeWord((H.xi(2, 1, True),))
    assert H.wedge_mul(a, a).is_zero()
    ab, ba = H.wedge_mul(a, b), H.wedge_mul(b, a)
    assert ab.gens == ba.gens and ab.sign == -ba.sign


def test_top_word_is_omega_then_conjugate():
    assert H.top_word(2, 1) == ((0, 1, 1), (0, 1, 2), (1, 1, 1), (1, 1, 2))


@settings(max_examples=100, deadline=None)
@given(st.permutations([(c, k, j) for c in (0, 1) for k in (1, 2) for j in (1, 2, 3)]))
def test_canonical_sign_matches_inversion_count(gens):
    s, w = H.canonical(gens)
    assert w == tuple(sorted(gens))
    assert s == inversion_sign(gens)


def test_sort_sign_is_a_sign_character():
    for p, q in [(2, 1), (3, 1), (2, 2), (3, 2)]:
        for s1, s2 in H.iter_sigma_pairs(p, q):
            word = H.xis_word(p, q, s1, s2)
            assert H.sort_sign(p, q, s1, s2) == inversion_sign(word)
            assert H.sort_sign(p, q, s1, s2) == H.sign_character_prediction(p, q, s1, s2)


@pytest.mark.parametrize("p,q", [(2, 1), (3, 1), (2, 2)])
def test_sort_sign_takes_both_values(p, q):
    signs = {H.sort_sign(p, q, s1, s2) for s1, s2 in H.iter_sigma_pairs(p, q)}
    assert signs == {1, -1}


def test_sort_sign_is_constant_when_p_is_one():
    assert {H.sort_sign(1, 2, s1, s2) for s1, s2 in H.iter_sigma_pairs(1, 2)} == {H.lemma_sign(1, 2)}


# --- the Kudla-Millson form ------------------------------------------------

def test_km_form_one_one():
    form = H.km_form(1, 1)
    word = ((0, 1, 1), (1, 1, 1))
    assert list(form.terms) == [word]
    want = PolyGaussian(2, None, {(1, 1, 0, 0): QI2(Fraction(1, 4)),
                                  (0, 0, 0, 0): Coefficient.pi_power(-1, Fraction(-1, 8))})
    assert form.component(word) == want


@pytest.mark.parametrize("p,q", [(1, 1), (2, 1), (3, 1), (2, 2)])
def test_km_form_equals_multi_index_expansion(p, q):
    assert H.km_form(p, q) == H.km_form_expansion(p, q, "composition")


@pytest.mark.parametrize("p,q,equal", [(1, 1, True), (2, 1, False), (3, 1, False), (2, 2, False)])
def test_literal_operator_pairing(p, q, equal):
    assert (H.km_form(p, q) == H.km_form_expansion(p, q, "literal")) is equal


@pytest.mark.parametrize("p,q", [(1, 1), (2, 1), (3, 1), (2, 2)])
def test_top_wedge_extraction(p, q):
    rep = H.extraction_check(p, q)
    assert rep["equal"]
    assert rep["matches_unsigned_lemma"] is (p == 1)


def test_form_json_round_trip():
    form = H.km_form(2, 1)
    assert H.KMForm.from_json(form.to_json()) == form


def test_km_schwartz_is_invariant_only_with_signs():
    assert all(ikeda.k_invariance_check(2, 1, samples=3, seed=1))
    assert not all(ikeda.k_invariance_check(2, 1, samples=3, seed=1, signed=False))


def test_budget_guard(monkeypatch):
    with pytest.raises(ResourceLimit):
        H.check_budget(4, 2)
    monkeypatch.setenv("KMLAB_TERM_BUDGET", "1e7")
    assert H.check_budget(4, 2) == 24 ** 4 * 4 * 6
    monkeypatch.setenv("KMLAB_TERM_BUDGET", "10")
    with pytest.raises(ResourceLimit):
        H.km_schwartz(2, 1)
