import math

import numpy as np
import pytest
from scipy import integrate, stats

from etamu import (BranchParams, DomainError, FormatIIParams, PoleProximityError, branch_mgf, branch_pdf,
                   decompose, derived_coeffs, format1_to_format2, format2_to_format1, mgf_gamma_ratio)


@pytest.mark.parametrize("bad", [dict(mu=0), dict(eta=-1), dict(p=0.0), dict(gbar=float("nan")),
                                 dict(mu=float("inf"))])
def test_branch_params_rejects_invalid(bad):
    kw = dict(mu=1.0, eta=1.0, p=1.0, gbar=1.0) | bad
    with pytest.raises(DomainError):
        BranchParams(**kw)


@pytest.mark.parametrize("eta2,p2", [(1.0, 0.0), (0.0, -1.0), (1.5, 0.2)])
def test_format2_range(eta2, p2):
    with pytest.raises(DomainError):
        FormatIIParams(1.0, eta2, p2, 1.0)


def test_format_conversions():
    f1 = format2_to_format1(FormatIIParams(1.0, 0.0, 0.0, 1.0))
    assert (f1.mu, f1.eta, f1.p, f1.gbar) == (1.0, 1.0, 1.0, 1.0)
    f1 = format2_to_format1(FormatIIParams(2.0, 1 / 3, 1 / 3, 5.0))
    assert f1.eta == pytest.approx(2.0, rel=1e-15) and f1.p == pytest.approx(2.0, rel=1e-15)
    f2 = format1_to_format2(BranchParams(2.0, 2.0, 2.0, 5.0))
    assert f2.eta2 == pytest.approx(1 / 3) and f2.p2 == pytest.approx(1 / 3)
    f2 = format1_to_format2(BranchParams(1.0, 1.0, 1.0, 1.0))
    assert f2.eta2 == 0.0 and f2.p2 == 0.0


def test_decompose_examples():
    d = decompose(BranchParams(1.0, 1.0, 1.0, 1.0), 1.0)
    assert (d.mu_x, d.mu_y, d.omega_x, d.omega_y) == (1.0, 1.0, 1.0, 1.0)
    d = decompose(BranchParams(1.5, 3.0, 0.5, 1.0), 2.0)
    assert (d.mu_x, d.mu_y, d.omega_x, d.omega_y) == pytest.approx((1.0, 2.0, 3.0, 1.0), rel=1e-15)


def test_derived_coeffs_examples():
    k = derived_coeffs(BranchParams(1.0, 0.5, 0.5, 1.0))
    assert (k.xi, k.a_coef, k.c_coef) == pytest.approx((1.0, 1.0, 1.0))
    assert (k.b_coef, k.d_coef, k.prefactor) == pytest.approx((2 / 3, 1 / 3, 1.0))
    k = derived_coeffs(BranchParams(2.0, 1.0, 1.0, 4.0))
    assert (k.xi, k.a_coef, k.b_coef, k.c_coef, k.d_coef, k.prefactor) == pytest.approx(
        (1.0, 0.5, 1.0, 0.5, 1.0, 0.25))


def test_prefactor_is_rate_power_product():
    k = derived_coeffs(BranchParams(1.3, 0.2, 3.0, 7.0))
    assert k.prefactor == pytest.approx(k.a_coef ** k.b_coef * k.c_coef ** k.d_coef, rel=1e-13)


@pytest.mark.parametrize("mu,eta,gbar", [(0.5, 0.3, 1.0), (1.0, 2.0, 5.0), (3.7, 1.0, 0.2)])
def test_pdf_equal_ratios_is_gamma(mu, eta, gbar):
    br = BranchParams(mu, eta, eta, gbar)
    x = np.linspace(0.05, 5.0, 25) * gbar
    ref = stats.gamma.pdf(x, mu, scale=gbar / mu)
    got = [branch_pdf(br, v) for v in x]
    np.testing.assert_allclose(got, ref, rtol=1e-12)


def test_pdf_origin():
    assert branch_pdf(BranchParams(1.0, 0.5, 0.5, 1.0), 0.0) == pytest.approx(1.0)
    assert branch_pdf(BranchParams(2.0, 0.5, 0.2, 1.0), 0.0) == 0.0


def test_pdf_normalizes():
    br = BranchParams(0.75, 0.25, 0.1, 2.0)
    total = sum(integrate.quad(lambda x: branch_pdf(br, x), a, b, limit=200, epsabs=0, epsrel=1e-12)[0]
                for a, b in [(0, 0.1), (0.1, 2), (2, 20), (20, np.inf)])
    assert total == pytest.approx(1.0, abs=1e-8)


def test_pdf_overflow_signalled():
    with pytest.raises(OverflowError):
        branch_pdf(BranchParams(0.01, 1.0, 1.0, 1.0), 1e-320)


def test_pdf_is_derivative_of_integral():
    br = BranchParams(1.4, 4.0, 0.3, 1.5)
    g, h = 1.7, 1e-3
    up = integrate.quad(lambda x: branch_pdf(br, x), g - h, g + h, epsabs=0, epsrel=1e-13)[0]
    assert up / (2 * h) == pytest.approx(branch_pdf(br, g), rel=1e-5)


def test_mgf_basic():
    br = BranchParams(1.7, 0.3, 2.0, 3.0)
    assert branch_mgf(br, 0) == 1
    eq = BranchParams(2.5, 0.7, 0.7, 3.0)
    s = 0.4 + 1.1j
    assert branch_mgf(eq, s) == pytest.approx((1 + 3.0 * s / 2.5) ** -2.5, rel=1e-13)
    h = 1e-5
    deriv = -(branch_mgf(br, h) - branch_mgf(br, -h)) / (2 * h)
    assert deriv.real == pytest.approx(3.0, rel=1e-6)


def test_mgf_branch_cut():
    br = BranchParams(1.0, 0.5, 2.0, 1.0)
    k = derived_coeffs(br)
    with pytest.raises(DomainError):
        branch_mgf(br, -min(k.a_coef, k.c_coef) - 0.1)


def test_mgf_format2_matches_format1():
    f2 = FormatIIParams(1.2, -0.4, 0.3, 2.0)
    for s in [0.3, 1 + 2j, 5 - 1j]:
        assert branch_mgf(f2, s) == pytest.approx(branch_mgf(format2_to_format1(f2), s), rel=1e-12)


def test_gamma_ratio_form(rng):
    assert abs(mgf_gamma_ratio(BranchParams(1.3, 0.4, 2.0, 3.0), 0) - 1) < 1e-10
    assert mgf_gamma_ratio(BranchParams(1.0, 0.5, 0.5, 1.0), 1.0) == pytest.approx(0.5, rel=1e-12)
    for _ in range(100):
        br = BranchParams(*rng.uniform(0.1, 5, 3), rng.uniform(0.1, 100))
        s = complex(0.5, rng.normal(0, 20))
        ref = branch_mgf(br, s)
        assert abs(mgf_gamma_ratio(br, s) - ref) <= 1e-9 * abs(ref)


def test_gamma_ratio_pole():
    br = BranchParams(1.0, 1.0, 1.0, 1.0)  # rates are 1, so -1 - 1 = -2 is a Gamma pole
    with pytest.raises(PoleProximityError):
        mgf_gamma_ratio(br, complex(-2.0, 1e-12))
