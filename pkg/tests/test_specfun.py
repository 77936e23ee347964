import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from selfsim import specfun
from selfsim.errors import DegenerateLeadingTerm, InvalidParams, Overflow, Pole

mpmath.mp.dps = 50


def mp_series(a, b, z, terms=200):
    """Extended-precision Taylor sum of 1F1."""
    a, b, z = mpmath.mpf(a), mpmath.mpf(b), mpmath.mpf(z)
    total = term = mpmath.mpf(1)
    for k in range(terms):
        term *= (a + k) / (b + k) * z / (k + 1)
        total += term
    return total


def mp_hermite(nu, x):
    """Two-1F1 form of H_nu with extended-precision series and gamma."""
    nu, x = mpmath.mpf(nu), mpmath.mpf(x)
    w1 = 2**nu * mpmath.sqrt(mpmath.pi) * mpmath.rgamma((1 - nu) / 2)
    w2 = -2 * x * 2**nu * mpmath.sqrt(mpmath.pi) * mpmath.rgamma(-nu / 2)
    return w1 * mp_series(-nu / 2, 0.5, x * x) + w2 * mp_series((1 - nu) / 2, 1.5, x * x)


# -- kummer --------------------------------------------------------------

def test_kummer_at_origin_is_one():
    assert specfun.kummer_1f1(-0.5, 0.5, 0.0) == 1.0


def test_kummer_terminating_series():
    oracle = float(mp_series(-1, 0.5, 2))
    assert oracle == pytest.approx(-3.0)
    assert specfun.kummer_1f1(-1.0, 0.5, 2.0) == pytest.approx(oracle, rel=1e-14)


def test_kummer_large_z_uses_leading_term():
    z = 100.0
    lead = math.exp(z) * z**-1.0 * math.gamma(0.5) / math.gamma(-0.5)
    assert specfun.kummer_1f1(-0.5, 0.5, z) == pytest.approx(lead, rel=1e-3)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(-4, 4), b=st.floats(0.1, 5), z=st.floats(0, 40))
def test_kummer_series_matches_extended_precision(a, b, z):
    ref = mp_series(a, b, z, terms=400)
    got = specfun.kummer_1f1(a, b, z)
    # Relative to the largest term, which bounds the attainable accuracy under cancellation.
    scale = max(abs(float(ref)), float(mp_series(abs(a), b, z, terms=400)) * 1e-6, 1e-300)
    assert abs(got - float(ref)) <= 1e-10 * scale


@settings(max_examples=60, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(0.2, 4), z=st.floats(0, 20))
def test_contiguous_relation(a, b, z):
    f = specfun.kummer_1f1
    lhs = b * f(a, b, z) - b * f(a - 1, b, z) - z * f(a, b + 1, z)
    scale = max(abs(b * f(a, b, z)), abs(b * f(a - 1, b, z)), abs(z * f(a, b + 1, z)), 1.0)
    assert abs(lhs) <= 1e-8 * scale


def test_kummer_scaled_matches_unscaled():
    z = np.array([0.0, 1.0, 12.5, 39.0])
    np.testing.assert_allclose(specfun.kummer_1f1_scaled(-0.5, 0.5, z),
                               np.exp(-z) * specfun.kummer_1f1(-0.5, 0.5, z), rtol=1e-13)


def test_kummer_even_in_xi():
    xi = np.linspace(0, 6, 13)
    np.testing.assert_array_equal(specfun.kummer_1f1(0.7, 0.5, xi**2 / 2), specfun.kummer_1f1(0.7, 0.5, (-xi) ** 2 / 2))


@pytest.mark.parametrize("beta", [0.0, -1.0, -3.0])
def test_kummer_rejects_nonpositive_integer_beta(beta):
    with pytest.raises(InvalidParams):
        specfun.kummer_1f1(0.5, beta, 1.0)
    with pytest.raises(InvalidParams):
        specfun.KummerParams(0.5, beta, 1.0)


def test_kummer_rejects_negative_z():
    with pytest.raises(InvalidParams):
        specfun.kummer_1f1(0.5, 0.5, -1.0)


def test_kummer_params_evaluate():
    assert specfun.KummerParams(-1.0, 0.5, 2.0).evaluate() == pytest.approx(-3.0, rel=1e-14)


def test_asymptotic_trivial_ratio():
    assert specfun.kummer_asymptotic(0.5, 0.5, 10.0) == pytest.approx(math.exp(10.0), rel=1e-14)


def test_asymptotic_against_loggamma_oracle():
    z = mpmath.mpf(50)
    oracle = mpmath.exp(z) / z * mpmath.gamma(0.5) / mpmath.gamma(-0.5)
    assert specfun.kummer_asymptotic(-0.5, 0.5, 50.0) == pytest.approx(float(oracle), rel=1e-12)


def test_asymptotic_degenerate_and_overflow():
    with pytest.raises(DegenerateLeadingTerm):
        specfun.kummer_asymptotic(-1.0, 0.5, 5.0)
    with pytest.raises(Overflow):
        specfun.kummer_asymptotic(0.5, 0.5, 800.0)


def test_leading_term_ratio_approaches_one():
    ratios = [float(mpmath.hyp1f1(-0.5, 0.5, z)) / specfun.kummer_asymptotic(-0.5, 0.5, z) for z in (40, 60, 100, 400)]
    assert all(r1 > r2 > 1 for r1, r2 in zip(ratios, ratios[1:]))


@pytest.mark.xfail(strict=True, reason="the leading term alone is 3.8% off the series at z = 40")
def test_continuity_across_switch():
    below = specfun.kummer_1f1(-0.5, 0.5, np.nextafter(specfun.Z_SWITCH, 0))
    above = specfun.kummer_1f1(-0.5, 0.5, np.nextafter(specfun.Z_SWITCH, 100))
    assert above / below == pytest.approx(1.0, abs=1e-3)


# -- hermite -------------------------------------------------------------

def test_hermite_trivial_values():
    assert specfun.hermite_nu(0.0, 1.7) == pytest.approx(1.0, rel=1e-14)
    assert specfun.hermite_nu(1.0, 3.0) == pytest.approx(6.0, rel=1e-14)


def test_hermite_half_against_oracle():
    oracle = float(mp_hermite(0.5, 1.0))
    assert oracle == pytest.approx(float(mpmath.hermite(0.5, 1.0)), rel=1e-30)
    assert specfun.hermite_nu(0.5, 1.0) == pytest.approx(oracle, rel=1e-12)


@pytest.mark.parametrize("n", range(11))
def test_hermite_nu_matches_polynomials(n):
    x = np.linspace(-5, 5, 101)
    ref = np.asarray(specfun.hermite_poly(n, x))
    got = np.asarray(specfun.hermite_nu(float(n), x))
    assert np.all(np.abs(got - ref) <= 1e-12 * np.maximum(np.abs(ref), 1.0))


@settings(max_examples=150, deadline=None)
@given(nu=st.floats(-3, 12), x=st.floats(-4, 25))
def test_hermite_real_index_against_mpmath(nu, x):
    ref = float(mpmath.hermite(nu, x))
    # Near a zero on the negative axis rounding is relative to the envelope there.
    floor = 1e-13 * max(1.0, abs(float(mpmath.hermite(nu, -abs(x)))))
    assert specfun.hermite_nu(nu, x) == pytest.approx(ref, rel=1e-10, abs=floor)


@pytest.mark.parametrize("nu", [0.5, 1.5, 2.0, 3.0])
def test_hermite_derivative_identity(nu):
    h = 1e-5
    for x in np.linspace(-2.5, 2.5, 11):
        fd = (specfun.hermite_nu(nu, x + h) - specfun.hermite_nu(nu, x - h)) / (2 * h)
        assert abs(fd - 2 * nu * specfun.hermite_nu(nu - 1, x)) < 1e-6


def test_hermite_scaled_and_guard():
    x = np.array([0.3, 2.0, 8.0])
    np.testing.assert_allclose(specfun.hermite_nu_scaled(1.3, x), np.exp(-x**2) * specfun.hermite_nu(1.3, x), rtol=1e-12)
    with pytest.raises(Overflow):
        specfun.hermite_nu(0.5, 40.0)


def test_hermite_poly_examples_and_parity():
    assert specfun.hermite_poly(2, 0.0) == -2.0
    assert specfun.hermite_poly(3, 1.0) == -4.0
    assert specfun.hermite_poly(0, -9.0) == 1.0
    x = np.linspace(0.1, 4, 9)
    for n in range(8):
        np.testing.assert_allclose(specfun.hermite_poly(n, -x), (-1) ** n * np.asarray(specfun.hermite_poly(n, x)))


# -- erfi ----------------------------------------------------------------

def test_erfi_values():
    oracle, _ = integrate.quad(lambda s: 2 / math.sqrt(math.pi) * math.exp(s * s), 0, 1, epsabs=0, epsrel=1e-12)
    assert specfun.erfi(0.0) == 0.0
    assert specfun.erfi(1.0) == pytest.approx(oracle, rel=1e-12)
    assert specfun.erfi(-1.0) == -specfun.erfi(1.0)


@pytest.mark.parametrize("x", [0.5, 2.9, 3.0, 3.1, 7.0, 20.0])
def test_erfi_across_branches(x):
    assert specfun.erfi(x) == pytest.approx(float(mpmath.erfi(x)), rel=1e-12)
    assert specfun.erfi_scaled(x) == pytest.approx(float(mpmath.exp(-x * x) * mpmath.erfi(x)), rel=1e-12)


def test_erfi_overflow():
    with pytest.raises(Overflow):
        specfun.erfi(30.0)


# -- log gamma -----------------------------------------------------------

def test_log_gamma_examples():
    assert specfun.log_gamma(1.0) == (pytest.approx(0.0, abs=1e-15), 1)
    val, sign = specfun.log_gamma(0.5)
    assert sign == 1 and val == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-14)
    # Reflection: Gamma(-1/2) = Gamma(3/2) / ((-1/2)(1/2)).
    val, sign = specfun.log_gamma(-0.5)
    assert sign == -1 and val == pytest.approx(math.log(float(mpmath.gamma(1.5)) / 0.25), rel=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
def test_log_gamma_poles(x):
    with pytest.raises(Pole):
        specfun.log_gamma(x)


@settings(max_examples=100, deadline=None)
@given(x=st.floats(-20, 50).filter(lambda v: abs(v - round(v)) > 1e-6 or v > 0.5))
def test_log_gamma_against_mpmath(x):
    val, sign = specfun.log_gamma(x)
    ref = mpmath.loggamma(x)
    assert val == pytest.approx(float(mpmath.re(ref)), rel=1e-12, abs=1e-13)
    assert sign == (1 if mpmath.gamma(x) > 0 else -1)


@pytest.mark.parametrize("z", [0.0, 0.25, 7.0, 39.0, 64.0, 120.0, 1e4])
def test_kummer_half_closed_form(z):
    # exp(-z) 1F1(-1/2, 1/2, z) = 1 - sqrt(pi z) exp(-z) erfi(sqrt z); the oracle uses the series.
    ref = mpmath.exp(-z) * mpmath.hyp1f1(-0.5, 0.5, z)
    assert specfun.kummer_half_scaled(z) == pytest.approx(float(ref), rel=1e-12)
    dref = -2.0 if z == 0 else float(mpmath.diff(lambda q: mpmath.exp(-q) * mpmath.hyp1f1(-0.5, 0.5, q), z))
    assert specfun.kummer_half_scaled_dz(z) == pytest.approx(dref, rel=1e-11)


def test_kummer_half_agrees_with_general_series():
    z = np.linspace(0, 39, 40)
    np.testing.assert_allclose(specfun.kummer_half_scaled(z), specfun.kummer_1f1_scaled(-0.5, 0.5, z), rtol=1e-10, atol=1e-14)
