import cmath
import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from kmlab import gausspoly as gp
from kmlab import numlat as N
from kmlab import weil as W
from kmlab.errors import DecompositionUnsupported, DomainError, InputError, UnsupportedScale
from kmlab.field import I_QI2, QI2, SQRT2_QI2
from kmlab.gausspoly import PolyGaussian
from kmlab.ikeda import random_polygaussian

G = W.GroupElementData


def random_points(rng, n, count=10):
    return [[complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(n)]
            for _ in range(count)]


def sample_function(num_vars=2, seed=0):
    return random_polygaussian(num_vars, random.Random(seed), terms=3, max_degree=2)


# --- the action ---------------------------------------------------------------

def test_identity_acts_trivially():
    f = sample_function()
    assert W.act(G.identity(), f, 2) == f


@pytest.mark.parametrize("signs", [[1, 1], [1, -1], [-1, -1]])
def test_n_b_multiplies_by_a_phase(signs):
    f, b = sample_function(), 0.37
    g = W.act(G.n(b), f, 2, signs)
    for x in random_points(random.Random(1), 2):
        q = sum(s * abs(c) ** 2 for s, c in zip(signs, x))
        assert g.evaluate(x) == pytest.approx(cmath.exp(2j * math.pi * b * q) * f.evaluate(x),
                                              abs=1e-12)


@pytest.mark.parametrize("a", [2, Fraction(1, 3), -1])
def test_m_a_rescales_with_unitary_weight(a):
    f = sample_function()
    g = W.act(G.m(a), f, 2)
    assert g.exact
    for x in random_points(random.Random(2), 2):
        want = abs(a) ** 2 * f.evaluate([c * float(a) for c in x])
        assert g.evaluate(x) == pytest.approx(want, abs=1e-9)


def test_m_a_with_a_complex_unit_and_sqrt2():
    f = sample_function(1, seed=3)
    g = W.act(G.m(I_QI2), f, 1)
    h = W.act(G.m(SQRT2_QI2), f, 1)
    x = [0.3 - 0.1j]
    assert g.evaluate(x) == pytest.approx(f.evaluate([1j * x[0]]), abs=1e-12)
    assert h.evaluate(x) == pytest.approx(math.sqrt(2) * f.evaluate([math.sqrt(2) * x[0]]),
                                          abs=1e-12)
    with pytest.raises(UnsupportedScale):
        # |1 + i sqrt2| = sqrt3 is not in the coefficient field
        W.act(G.m(QI2(1) + I_QI2 * SQRT2_QI2), f, 1)


@settings(max_examples=25, deadline=None)
@given(st.fractions(1, 5, max_denominator=4), st.fractions(-5, -1, max_denominator=4))
def test_m_is_a_homomorphism(a1, a2):
    f = sample_function(2, seed=4)
    lhs = W.act(G.m(a1), W.act(G.m(a2), f, 2), 2)
    assert lhs == W.act(G.m(a1 * a2), f, 2)


def test_n_is_additive():
    f = sample_function()
    lhs = W.act(G.n(0.2), W.act(G.n(0.5), f, 2), 2)
    rhs = W.act(G.n(0.7), f, 2)
    x = [0.4 + 0.2j, -0.1 + 0.5j]
    assert lhs.evaluate(x) == pytest.approx(rhs.evaluate(x), abs=1e-12)


@pytest.mark.parametrize("signs", [[1, 1], [1, -1]])
def test_w0_squared_is_parity_and_fourth_power_is_identity(signs):
    f = sample_function(seed=6)
    w = lambda u: W.act(G.w0(), u, 2, signs)
    assert w(w(f)) == gp.parity(f)
    assert w(w(w(w(f)))) == f


def test_w0_fixes_the_gaussian():
    phi = PolyGaussian.gaussian(2)
    assert W.act(G.w0(), phi, 2, [1, -1]) == phi


def test_group_element_errors():
    with pytest.raises(DomainError):
        G.m(0)
    with pytest.raises(DomainError):
        G.g_tau(1 - 1j)
    with pytest.raises(InputError):
        G("k")
    with pytest.raises(InputError):
        W.act(G.n(1, 2), sample_function(3), 2)
    with pytest.raises(InputError):
        W.act(G.n(1), sample_function(2), 2, [1, 2])


# --- g_tau and the Siegel-Weil section -------------------------------------------

@pytest.mark.parametrize("tau", [1j, 0.3 + 0.8j, -1.2 + 2.5j])
def test_g_tau_on_the_km_gaussian(tau):
    # exp(-2 pi |x|^2) turns into v^{m/2} e_*(b tau) with b = |xi|^2
    f = PolyGaussian.gaussian(2, [2, 2])
    xi = [0.3 + 0.4j, -0.5j]
    b = sum(abs(c) ** 2 for c in xi)
    want = tau.imag * cmath.exp(2j * math.pi * b * tau)
    assert W.g_tau_evaluate([tau], f, xi, 2) == pytest.approx(want, abs=1e-12)
    assert W.act(G.g_tau(tau), f, 2).evaluate(xi) == pytest.approx(want, abs=1e-12)


def test_g_tau_two_places():
    f = PolyGaussian.gaussian(2, [2, 2])
    tau, xi = [0.5 + 1j, 2j], [0.2, 0.1 + 0.3j]
    want = math.sqrt(1) * math.sqrt(2) * W.e_star([0.04, 0.1], tau)
    assert W.g_tau_evaluate(tau, f, xi, 1) == pytest.approx(want, abs=1e-12)
    with pytest.raises(DomainError):
        W.g_tau_evaluate([1 - 1j, 1j], f, xi, 1)


@pytest.mark.parametrize("s", [0, 1, 0.5 + 2j])
def test_siegel_weil_section_values(s):
    phi = PolyGaussian.gaussian(2)
    # m = 2, n = 1, s0 = 1/2
    assert W.siegel_weil_section(phi, s, G.identity(), 2) == pytest.approx(1)
    assert W.siegel_weil_section(phi, s, G.n(0.4), 2) == pytest.approx(1)
    assert W.siegel_weil_section(phi, s, G.m(2), 2) == pytest.approx(4 ** (s - 0.5) * 4)
    v = 3.0
    assert W.siegel_weil_section(phi, s, G.g_tau(0.2 + 3j), 2) == pytest.approx(
        v ** (s - 0.5) * v)


def test_siegel_weil_section_rejects_w0():
    with pytest.raises(DecompositionUnsupported):
        W.siegel_weil_section(PolyGaussian.gaussian(1), 1, G.w0(), 1)


# --- Fourier coefficients and the generating series ----------------------------------

def table(entries):
    return W.VolumeTable.from_json([{"b": b, "vol": v} for b, v in entries])


def test_empty_table_gives_zero():
    assert W.assemble_fourier_coefficient([1], W.VolumeTable(), [1j], 2) == 0
    assert W.generating_series(W.VolumeTable(), [1j], 2, c0=0.5) == 0.5


def test_single_entry_over_sqrt2():
    FB = N.standard_field("Q(sqrt2)")
    t = table([([1, 0], 1)])
    got = W.assemble_fourier_coefficient([1, 0], t, [1j, 1j], 2, FB)
    assert got == pytest.approx((1j) ** -2 * math.exp(-2 * math.pi * 2), abs=1e-15)


def test_assembly_is_linear_in_the_volumes():
    t = table([([1], "1/2"), ([1], 2), ([3], 1)])
    tau = [0.1 + 0.6j]
    one = W.assemble_fourier_coefficient([1], t, tau, 3)
    assert W.assemble_fourier_coefficient([1], t.scaled(3), tau, 3) == pytest.approx(3 * one)
    assert t.total_volume([1]) == Fraction(5, 2)


def test_generating_series_three_terms():
    t = table([([1], "1/2"), ([2], 1), ([3], 2)])
    tau, c0 = 0.3 + 0.8j, 0.25
    q = cmath.exp(2j * math.pi * tau)
    want = c0 + 0.5 * q + q ** 2 + 2 * q ** 3
    assert W.generating_series(t, [tau], 4, c0=c0) == pytest.approx(want, abs=1e-12)
    rows = W.q_expansion(t, [tau], 4)
    assert [r[0] for r in rows] == [(1,), (2,), (3,)]
    csv_text = W.q_expansion_csv(rows)
    assert csv_text.splitlines()[0] == "b0,abs,arg" and len(csv_text.splitlines()) == 4


def test_kappa():
    assert W.kappa([1, 2], n=2) == pytest.approx(-math.exp(-6 * math.pi))


@pytest.mark.parametrize("n,v,m", [(1, 2, 3), (2, Fraction(1, 3), 5), (3, 7, 1), (4, "5/2", 2)])
def test_prefactor_identity(n, v, m):
    assert W.prefactor_identity(n, Fraction(v), m)


@pytest.mark.parametrize("field,ring", [("Q(sqrt2)", -4), ("Q(sqrt5)", -3)])
def test_intertwining(field, ring):
    L0 = N.HermitianLattice(ring, [[(2, 0)]])
    rep = W.intertwining_check([3, 1], N.standard_field(field), L0, samples=100, seed=2)
    assert rep["mismatches"] == 0 and rep["max_phase_error"] < 1e-12


@pytest.mark.parametrize("bad", [
    {"not": "a list"},
    [{"vol": 1}],
    [{"b": [1], "vol": -1}],
    [{"b": [1], "vol": 1, "mult": 0}],
    [{"b": ["x"], "vol": 1}],
])
def test_volume_table_errors(bad):
    with pytest.raises(InputError):
        W.VolumeTable.from_json(bad)


def test_volume_table_load(tmp_path):
    good = tmp_path / "v.json"
    good.write_text(json.dumps([{"b": [1], "vol": "1/3", "mult": 2}]))
    assert W.VolumeTable.load(str(good)).total_volume([1]) == Fraction(2, 3)
    bad = tmp_path / "w.json"
    bad.write_text("[{")
    with pytest.raises(InputError):
        W.VolumeTable.load(str(bad))


def test_multi_coordinate_b_needs_a_field():
    with pytest.raises(InputError):
        W.assemble_fourier_coefficient([1, 0], table([([1, 0], 1)]), [1j, 1j], 2)
