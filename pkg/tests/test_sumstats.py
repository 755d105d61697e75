import math

import numpy as np
import pytest
from scipy import integrate, stats
from scipy.special import gammainc

from conftest import TEST_CHANNELS, fig1_channel
from etamu import (BranchParams, ConvergenceError, DomainError, MrcChannel, SeriesControls, asymptotic_cdf,
                   branch_mgf, branch_pdf, iid_sum_cdf, iid_sum_pdf, sum_cdf, sum_cdf_array, sum_mgf, sum_pdf,
                   sum_pdf_array)

ROUTES = ["phi2-series", "bromwich"]


def test_mgf_examples():
    ch = fig1_channel()
    assert sum_mgf(ch, 0) == 1
    br = BranchParams(0.75, 0.25, 0.1, 2.0)
    assert sum_mgf(MrcChannel((br,)), 0.3 + 2j) == pytest.approx(branch_mgf(br, 0.3 + 2j), rel=1e-14)
    iid = MrcChannel.iid(BranchParams(1.5, 0.8, 0.8, 2.0), 3)
    assert sum_mgf(iid, 1.5) == pytest.approx((1 + 2.0 * 1.5 / 1.5) ** -4.5, rel=1e-13)
    with pytest.raises(DomainError):
        sum_mgf(ch, -1e3)


def test_channel_construction():
    with pytest.raises(DomainError):
        MrcChannel(())
    with pytest.raises(DomainError):
        MrcChannel.iid(BranchParams(1, 1, 1, 1), 0)
    ch = MrcChannel.from_lists([1.0, 2.0], 0.5, 0.5, [1.0, 3.0])
    assert ch.L == 2 and ch.total_mu == 3.0
    assert ch.scaled(10.0).branches[1].gbar == 30.0


@pytest.mark.parametrize("route", ROUTES)
def test_single_branch_matches_branch_pdf(route):
    br = BranchParams(0.75, 0.25, 0.1, 2.0)
    ch = MrcChannel((br,))
    for g in np.geomspace(0.02, 20, 12):
        assert sum_pdf(ch, g, route) == pytest.approx(branch_pdf(br, g), rel=1e-8)


@pytest.mark.parametrize("route", ROUTES)
@pytest.mark.parametrize("mu,L,gbar", [(0.5, 1, 1.0), (1.5, 2, 3.0), (2.0, 4, 0.5)])
def test_equal_ratio_reduces_to_gamma(route, mu, L, gbar):
    ch = MrcChannel.iid(BranchParams(mu, 0.4, 0.4, gbar), L)
    x = np.geomspace(0.05, 8, 10) * gbar
    pdf = [sum_pdf(ch, v, route) for v in x]
    cdf = [sum_cdf(ch, v, route) for v in x]
    np.testing.assert_allclose(pdf, stats.gamma.pdf(x, mu * L, scale=gbar / mu), rtol=1e-8)
    np.testing.assert_allclose(cdf, gammainc(mu * L, mu * x / gbar), atol=1e-8)


def test_fig1_routes_agree():
    ch = fig1_channel()
    for g in [0.5, 2.0, 8.0]:
        a, b = sum_pdf(ch, g, "phi2-series"), sum_pdf(ch, g, "bromwich")
        assert a == pytest.approx(b, rel=1e-6)


def test_cdf_derivative_is_pdf():
    ch = fig1_channel()
    for g in [0.5, 2.0, 8.0]:
        h = 1e-4 * g
        fd = (sum_cdf(ch, g + h) - sum_cdf(ch, g - h)) / (2 * h)
        assert fd == pytest.approx(sum_pdf(ch, g), rel=1e-5)


def test_origin_and_limits():
    ch = fig1_channel()
    assert sum_cdf(ch, 0.0) == 0.0
    assert sum_pdf(ch, 0.0) == 0.0
    assert sum_pdf(MrcChannel.iid(BranchParams(1.0, 0.5, 0.5, 1.0), 1), 0.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        sum_pdf(MrcChannel((BranchParams(0.5, 1, 1, 1),)), 0.0)
    with pytest.raises(DomainError):
        sum_cdf(ch, -1.0)
    with pytest.raises(DomainError):
        sum_pdf(ch, 1.0, route="magic")


def test_series_nonconvergence_not_rerouted():
    ch = fig1_channel()
    ctl = SeriesControls(max_total_degree=3)
    with pytest.raises(ConvergenceError):
        sum_cdf(ch, 5.0, "phi2-series", ctl=ctl)
    assert sum_cdf(ch, 5.0, "auto", ctl=ctl) == pytest.approx(sum_cdf(ch, 5.0, "bromwich"), rel=1e-9)


def test_cdf_tends_to_one(any_channel):
    total = sum(b.gbar for b in any_channel.branches)
    assert sum_cdf(any_channel, 50 * total) == pytest.approx(1.0, abs=1e-4)


def test_cdf_monotone(any_channel):
    g = np.geomspace(1e-3, 30, 80) * sum(b.gbar for b in any_channel.branches)
    v = [sum_cdf(any_channel, x) for x in g]
    assert np.all(np.diff(v) >= 0)


def _quad_moments(ch):
    mean = sum(b.gbar for b in ch.branches)
    edges = [0.0, 1e-3 * mean, 0.1 * mean, mean, 5 * mean, 30 * mean, np.inf]
    m0 = m1 = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        m0 += integrate.quad(lambda x: sum_pdf(ch, x) if x > 0 else 0.0, lo, hi, epsabs=0, epsrel=1e-10, limit=200)[0]
        m1 += integrate.quad(lambda x: x * sum_pdf(ch, x) if x > 0 else 0.0, lo, hi, epsabs=0, epsrel=1e-10,
                             limit=200)[0]
    return m0, m1, mean


def test_pdf_normalization_and_mean(any_channel):
    m0, m1, mean = _quad_moments(any_channel)
    assert m0 == pytest.approx(1.0, abs=1e-6)
    assert m1 == pytest.approx(mean, rel=1e-5)


def test_permutation_invariance():
    ch = fig1_channel(eta=0.9)
    rev = MrcChannel(ch.branches[::-1])
    for g in [0.3, 2.0, 9.0]:
        assert sum_pdf(rev, g) == pytest.approx(sum_pdf(ch, g), rel=1e-12)
        assert sum_cdf(rev, g) == pytest.approx(sum_cdf(ch, g), rel=1e-12)


def test_iid_routes():
    br = BranchParams(1.5, 0.25, 0.25, 2.0)
    assert iid_sum_pdf(br, 2, 3.0) == pytest.approx(sum_pdf(MrcChannel.iid(br, 2), 3.0), rel=1e-9)
    ext = BranchParams(0.8, 3.0, 0.3, 1.5)
    assert iid_sum_pdf(ext, 1, 1.1) == pytest.approx(branch_pdf(ext, 1.1), rel=1e-9)
    assert iid_sum_cdf(ext, 3, 0.0) == 0.0
    x = np.linspace(0.2, 10, 10)
    np.testing.assert_allclose([iid_sum_cdf(BranchParams(1.2, 2, 2, 1.0), 3, v) for v in x],
                               gammainc(3.6, 1.2 * x), atol=1e-8)


def test_array_helpers_match_scalar():
    ch = fig1_channel()
    x = np.array([0.0, 0.4, 2.5, 11.0])
    np.testing.assert_allclose(sum_cdf_array(ch, x), [sum_cdf(ch, v) for v in x], atol=1e-12)
    np.testing.assert_allclose(sum_pdf_array(ch, x), [sum_pdf(ch, v) for v in x], rtol=1e-9, atol=1e-300)


def test_asymptotic_cdf():
    ch = fig1_channel(gbar=1e5)
    assert asymptotic_cdf(ch, 1.0) / sum_cdf(ch, 1.0) == pytest.approx(1.0, abs=0.02)
    iid = MrcChannel.iid(BranchParams(1.3, 0.7, 0.7, 4.0), 2)
    assert asymptotic_cdf(iid, 0.2) == pytest.approx((1.3 * 0.2 / 4.0) ** 2.6 / math.gamma(3.6), rel=1e-13)
    a, b = asymptotic_cdf(ch, 1.0), asymptotic_cdf(ch.scaled(10.0), 1.0)
    assert math.log10(b / a) == pytest.approx(-ch.total_mu, rel=1e-12)
