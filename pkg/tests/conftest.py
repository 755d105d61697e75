import numpy as np
import pytest

from etamu import BranchParams, MrcChannel

FIG1_MU = [0.75, 1.25, 1.75, 1.5]
FIG1_P = [0.1, 0.2, 0.3, 0.4]


def fig1_channel(eta=0.5, gbar=1.0):
    return MrcChannel.from_lists(FIG1_MU, eta, FIG1_P, gbar)


def fig3_channel(gbar=10.0, mu=1.0):
    return MrcChannel.from_lists(mu, [0.25, 0.5, 0.75], 0.5, gbar)


def capacity_channel(gbar=1.0):
    return MrcChannel.iid(BranchParams(1.0, 0.25, 0.25, gbar), 3)


TEST_CHANNELS = {
    "L1-extended": MrcChannel((BranchParams(0.75, 0.25, 0.1, 2.0),)),
    "L2-iid": MrcChannel.iid(BranchParams(1.5, 0.25, 0.25, 2.0), 2),
    "L2-inid": MrcChannel.from_lists([0.6, 2.2], [3.0, 0.4], [0.5, 2.0], [1.0, 3.0]),
    "L3-fig3": fig3_channel(),
    "L3-capacity": capacity_channel(3.0),
    "L4-fig1": fig1_channel(),
}


@pytest.fixture(params=sorted(TEST_CHANNELS))
def any_channel(request):
    return TEST_CHANNELS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)
