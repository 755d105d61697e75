import math

import numpy as np
import pytest
from scipy import stats
from scipy.interpolate import PchipInterpolator
from scipy.special import gammainc

from conftest import capacity_channel, fig1_channel, fig3_channel
from etamu import (BranchParams, CapacityFit, DomainError, MrcChannel, SimConfig, capacity_numint, estimate_capacity,
                   estimate_outage, estimate_ser, modulation_preset, outage, sample_branch, sample_sum, ser_fd,
                   simulate_sum, sum_cdf, sum_cdf_array)
from etamu.montecarlo import block_generator, ks_band, ks_statistic

N = 1_000_000


def test_config_validation():
    for bad in [dict(seed=-1), dict(seed=2 ** 64), dict(replicas=0), dict(stream_count=0), dict(replicas=1.5)]:
        with pytest.raises(DomainError):
            SimConfig(**bad)


def test_equal_ratio_branch_is_gamma():
    br = BranchParams(1.7, 0.6, 0.6, 3.0)
    x = sample_branch(br, block_generator(11, 0), N)
    d = ks_statistic(x, cdf=lambda v: gammainc(1.7, 1.7 * v / 3.0))
    assert d <= ks_band(N)


def test_branch_mean():
    br = BranchParams(0.75, 0.25, 0.1, 2.0)
    x = sample_branch(br, block_generator(12, 0), N)
    assert abs(x.mean() - 2.0) <= 4 * x.std(ddof=1) / math.sqrt(N)
    assert np.isscalar(sample_branch(br, block_generator(12, 1)))


def test_branch_matches_analytic_cdf():
    ch = MrcChannel((BranchParams(0.75, 0.25, 0.1, 2.0),))
    x = simulate_sum(ch, SimConfig(13, N))
    assert ks_statistic(x, ch=ch) <= ks_band(N)


def test_interpolated_cdf_is_faithful():
    # the interpolated model CDF must be far more accurate than the band
    ch = fig1_channel()
    x = simulate_sum(ch, SimConfig(14, 20_000))
    exact = np.array([sum_cdf(ch, v) for v in np.sort(x)[::500]])
    grid = np.unique(np.quantile(x, np.linspace(0, 1, 4000)))
    approx = PchipInterpolator(grid, sum_cdf_array(ch, grid))(np.sort(x)[::500])
    assert np.max(np.abs(approx - exact)) < 1e-5


def test_sum_mean_and_law():
    ch = fig1_channel(eta=0.2, gbar=2.0)
    x = simulate_sum(ch, SimConfig(15, N))
    assert abs(x.mean() - 8.0) <= 4 * x.std(ddof=1) / math.sqrt(N)
    assert ks_statistic(x, ch=ch) <= ks_band(N)
    rev = simulate_sum(MrcChannel(ch.branches[::-1]), SimConfig(16, 200_000))
    assert stats.ks_2samp(x[:200_000], rev).pvalue > 1e-3
    assert sample_sum(ch, block_generator(1, 0), 3).shape == (3,)


def test_outage_estimates():
    iid = MrcChannel.iid(BranchParams(1.5, 2.0, 2.0, 3.0), 2)
    est, hw = estimate_outage(iid, 1.2, SimConfig(17, N))
    assert abs(est - gammainc(3.0, 0.6)) <= hw
    assert estimate_outage(iid, 0.0, SimConfig(17, 1000))[0] == 0.0
    ch = fig1_channel()
    est, hw = estimate_outage(ch, 1.0, SimConfig(18, N))
    assert abs(est - outage(ch, 1.0)) <= 3 * hw


def test_ser_estimates():
    mod = modulation_preset("BPSK")
    ch = fig3_channel(gbar=10.0)
    est, hw = estimate_ser(ch, mod, SimConfig(19, N))
    assert abs(est - ser_fd(ch, mod)) <= 3 * hw
    est2, hw2 = estimate_ser(ch, mod.scaled(2.0), SimConfig(19, N))
    assert est2 == 2 * est and hw2 == 2 * hw
    assert estimate_ser(fig3_channel(gbar=100.0), mod, SimConfig(20, 200_000))[0] < 1e-3


def test_capacity_estimates():
    ch = capacity_channel(10.0)
    est, hw = estimate_capacity(ch, SimConfig(21, N))
    assert abs(est - capacity_numint(ch, exact_log=True)) <= 3 * hw
    one = CapacityFit((1.0, 0, 0, 0), (0.0, 0, 0, 0))
    assert estimate_capacity(ch, SimConfig(21, 1000), exact_log=False, fit=one)[0] == 1.0
    lo = estimate_capacity(capacity_channel(1.0), SimConfig(22, 100_000))[0]
    assert lo < estimate_capacity(capacity_channel(2.0), SimConfig(22, 100_000))[0]


def test_determinism_across_streams():
    ch = fig1_channel()
    mod = modulation_preset("QPSK")
    base = SimConfig(23, 300_001, 1)
    for streams in (2, 5):
        cfg = SimConfig(23, 300_001, streams)
        assert estimate_outage(ch, 1.0, cfg) == estimate_outage(ch, 1.0, base)
        assert estimate_ser(ch, mod, cfg) == estimate_ser(ch, mod, base)
        assert np.array_equal(simulate_sum(ch, cfg), simulate_sum(ch, base))


def test_halfwidth_scaling():
    ch = fig3_channel()
    mod = modulation_preset("BPSK")
    for fn in (lambda c: estimate_outage(ch, 2.0, c), lambda c: estimate_ser(ch, mod, c),
               lambda c: estimate_capacity(ch, c)):
        h1 = fn(SimConfig(24, 100_000))[1]
        h4 = fn(SimConfig(24, 400_000))[1]
        assert h1 / h4 == pytest.approx(2.0, rel=0.2)
