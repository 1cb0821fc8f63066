import math

import numpy as np
import pytest
from scipy import integrate

from rescur.algebra import MixedPoly
from rescur.oracles import (pv_monomial, residue_monomial, palle_rhs,
                            estimate_lhs)
from rescur.testforms import TestForm, FlatBump

BUMP = FlatBump()


def bump_mass():
    v, err = integrate.quad(lambda t: BUMP.value(t), 0.0, BUMP.t_hi,
                            points=[BUMP.t_lo], limit=200)
    assert err < 1e-12
    return v


def test_residue_calibration():
    phi = TestForm.bump_form(1, T=())
    val = residue_monomial((1,), phi)
    assert val == pytest.approx(2j * math.pi, rel=1e-6)


def test_pv_odd_symmetry_vanishes():
    # 1/z against a radial profile integrates to zero by angular symmetry
    phi = TestForm.bump_form(1)
    assert abs(pv_monomial((1,), phi)) < 1e-10


def test_pv_one_variable_closed_form():
    # [1/z].(z rho dz ^ dzbar) = -2i * Lebesgue integral of rho
    phi = TestForm.bump_form(1, poly=MixedPoly.variable(1, 0))
    want = -2j * math.pi * bump_mass()
    assert pv_monomial((1,), phi) == pytest.approx(want, rel=1e-8)


def test_pv_separable_two_variables():
    # [1/(z1 z2)].(z1 z2 rho rho dz ^ dzbar) factorizes into two discs
    poly = MixedPoly.monomial(2, (1, 1))
    phi = TestForm.bump_form(2, poly=poly)
    want = 4.0 * (math.pi * bump_mass()) ** 2
    assert pv_monomial((1, 1), phi) == pytest.approx(want, rel=1e-8)


def test_pv_taylor_subtraction_higher_pole():
    # for 1/z^3 a radial profile times z^2 survives: the subtraction removes
    # degrees <= 1 only, and the angular average again gives -2i * mass
    phi = TestForm.bump_form(1, poly=MixedPoly.monomial(1, (3,)))
    want = -2j * math.pi * bump_mass()
    assert pv_monomial((3,), phi) == pytest.approx(want, rel=1e-7)


def test_pv_rejects_partial_anti_degree():
    phi = TestForm.bump_form(2, T=(0,))
    with pytest.raises(ValueError):
        pv_monomial((1, 1), phi)


def test_residue_rejects_full_anti_degree():
    phi = TestForm.bump_form(1)
    with pytest.raises(ValueError):
        residue_monomial((1,), phi)


def test_residue_two_variables_matches_one_variable_mass():
    # dbar[1/z1] tensor a radial z2 factor: 2 pi i at z1 = 0 times the
    # Lebesgue pairing of rho dz2 ^ dzbar2, i.e. (2 pi i)(-2 i)(pi mass)
    phi = TestForm.bump_form(2, T=(1,))
    val = residue_monomial((1, 0), phi)
    want = 4.0 * math.pi ** 2 * bump_mass()
    assert val == pytest.approx(want, rel=1e-6)


def test_palle_rhs_zero_dbar_factor():
    phi = TestForm.bump_form(2, T=(1,))
    assert palle_rhs(1, 0, (1, 0), (0, 0), (0, 1), (0, 0), phi) == 0.0


def test_palle_rhs_support_rules():
    phi = TestForm.bump_form(2, T=(1,))
    with pytest.raises(ValueError):
        # alpha'' and beta'' support mismatch
        palle_rhs(1, 1, (0, 0), (1, 0), (0, 1), (0, 0), phi)
    with pytest.raises(ValueError):
        # alpha' and beta' overlap
        palle_rhs(1, 1, (1, 0), (0, 0), (1, 0), (0, 0), phi)


def test_palle_rhs_monomial_value():
    # k = 1, l = 1: pv of 1/z1 against z1 rho rho, residue in z2; moving
    # dzbar1 past dz2 to pair the factors costs one transposition, so the
    # tensor value is -(2 pi i)(-2 i pi mass)
    phi = TestForm.bump_form(2, poly=MixedPoly.monomial(2, (1, 0)), T=(0,))
    val = palle_rhs(1, 1, (1, 0), (0, 0), (0, 1), (0, 0), phi)
    want = -4.0 * math.pi ** 2 * bump_mass()
    assert val == pytest.approx(want, rel=1e-6)


def test_estimate_closed_forms_one_variable():
    for e in (1e-2, 1e-4):
        got = estimate_lhs("lemma54_single", (1,), e)
        assert got == pytest.approx(4.0 * math.pi * math.sqrt(e), rel=1e-12)
        got = estimate_lhs("lemma55_single", (1,), e)
        want = 4.0 * math.pi * e * (1.0 / math.sqrt(e) - 1.0)
        assert got == pytest.approx(want, rel=1e-12)
        got = estimate_lhs("lemma54_single", (2,), e)
        assert got == pytest.approx(4.0 * math.pi * e ** 0.25, rel=1e-12)


def test_estimate_two_variable_sublevel():
    # {|z1|^2 < eps} x (full disc): the second axis contributes a factor 1
    e = 1e-3
    got = estimate_lhs("lemma54_single", (1, 0), e)
    want = (4.0 * math.pi) ** 2 * math.sqrt(e)
    assert got == pytest.approx(want, rel=1e-9)


def test_estimate_pair_monotone_in_eps():
    vals = [estimate_lhs("lemma54_pair", (1, 0), e, beta=(0, 1), eps2=e)
            for e in (1e-2, 1e-3, 1e-4)]
    assert vals[0] > vals[1] > vals[2] > 0


def test_estimate_validation():
    with pytest.raises(ValueError):
        estimate_lhs("lemma99", (1,), 1e-2)
    with pytest.raises(ValueError):
        estimate_lhs("lemma54_single", (1, 1, 1), 1e-2)
    with pytest.raises(ValueError):
        estimate_lhs("lemma54_pair", (1, 0), 1e-2, beta=(0, 1))
