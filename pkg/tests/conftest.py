import numpy as np
import pytest

from superhedge.claims import ClaimSpec
from superhedge.market import MarketModelConfig


@pytest.fixture
def ref_trinomial():
    return MarketModelConfig("trinomial", x0=100.0, horizon=29, d=-0.01, m=0.0, u=0.01)


@pytest.fixture
def call100():
    return ClaimSpec("european_call", strike=100.0)


def tiny_trinomial(T):
    return MarketModelConfig("trinomial", x0=100.0, horizon=T, d=-0.01, m=0.0, u=0.01)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
