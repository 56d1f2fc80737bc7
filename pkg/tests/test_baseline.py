import math

import numpy as np
import pytest

from superhedge.baseline import (
    BsParams,
    barrier_superhedge_theoretical,
    bs_call_price,
    bs_delta,
    delta_hedge_simulate,
    delta_hedge_values,
)
from superhedge.claims import ClaimSpec
from superhedge.errors import ConfigError
from superhedge.market import MarketModelConfig, simulate_black_scholes

TAU = 30 / 250


def phi(x):
    return 0.5 * (1 + math.erf(x / math.sqrt(2)))


def test_call_price_reference_value():
    assert abs(bs_call_price(100, 100, 0.1, TAU) - 1.38) <= 0.005
    assert BsParams(100, 100, 0.1, TAU).call_price() == pytest.approx(bs_call_price(100, 100, 0.1, TAU))


def test_call_price_atm_closed_form():
    s = 0.1 * math.sqrt(TAU)
    assert bs_call_price(100, 100, 0.1, TAU) == pytest.approx(100 * (2 * phi(s / 2) - 1), rel=1e-12)


def test_call_price_limits():
    assert bs_call_price(100, 1e-9, 0.2, 1.0) == pytest.approx(100, rel=1e-9)
    assert bs_call_price(105, 100, 1e-12, 1e-6) == pytest.approx(5.0)
    assert bs_call_price(95, 100, 0.0, 1.0) == 0.0


def test_monotone_in_sigma_and_tau():
    sig = np.linspace(0.01, 1, 50)
    assert np.all(np.diff(bs_call_price(100, 105, sig, TAU)) > 0)
    tau = np.linspace(0.01, 2, 50)
    assert np.all(np.diff(bs_call_price(100, 95, 0.2, tau)) > 0)


def test_delta():
    assert bs_delta(100, 100, 0.1, TAU) == pytest.approx(phi(0.1 * math.sqrt(TAU) / 2), abs=1e-12)
    assert abs(bs_delta(100, 100, 0.1, TAU) - 0.507) < 5e-4
    assert bs_delta(200, 100, 0.1, TAU) == pytest.approx(1.0)
    assert bs_delta(50, 100, 0.1, TAU) == pytest.approx(0.0, abs=1e-12)
    d = bs_delta(np.linspace(80, 120, 41), 100, 0.2, TAU)
    assert np.all((d > 0) & (d < 1))


def test_params_validation():
    with pytest.raises(ConfigError):
        BsParams(100, 100, 0.0, TAU)
    with pytest.raises(ConfigError):
        BsParams(100, 100, 0.1, TAU, rate=0.01)


def test_delta_hedge_basic():
    cfg = MarketModelConfig("black_scholes", horizon=30, sigma=0.1)
    res = delta_hedge_simulate(cfg, ClaimSpec("european_call", strike=100), 1, seed=0)
    assert res.alpha_hat in (0.0, 1.0)
    assert res.initial_cost == bs_call_price(100, 100, 0.1, TAU)


@pytest.mark.parametrize("strike", [90.0, 110.0])
def test_delta_hedge_degenerate_diffusion(strike):
    cfg = MarketModelConfig("black_scholes", horizon=30, sigma=1e-9)
    res = delta_hedge_simulate(cfg, ClaimSpec("european_call", strike=strike), 500, seed=1)
    assert res.alpha_hat == 1.0


def test_delta_hedge_rejects_other_claims():
    cfg = MarketModelConfig("black_scholes", horizon=3)
    with pytest.raises(ConfigError):
        delta_hedge_simulate(cfg, ClaimSpec("barrier_up_out_call", strike=100, barrier=105), 10, 0)


def test_delta_hedge_values_start_convention():
    cfg = MarketModelConfig("black_scholes", horizon=2, sigma=0.2)
    batch = simulate_black_scholes(cfg, 3, seed=0)
    v = delta_hedge_values(cfg, 100.0, batch, timing="start")
    x = batch.prices[:, :, 0]
    d0 = bs_delta(100.0, 100.0, 0.2, 2 / 250)
    d1 = bs_delta(x[:, 1], 100.0, 0.2, 1 / 250)
    assert np.allclose(v[:, -1], v[0, 0] + d0 * (x[:, 1] - x[:, 0]) + d1 * (x[:, 2] - x[:, 1]))


def test_barrier_theoretical():
    assert barrier_superhedge_theoretical(100, 100, 105) == pytest.approx(4.7619, abs=1e-4)
    assert barrier_superhedge_theoretical(100, 105 - 1e-9, 105) == pytest.approx(0.0, abs=1e-8)
    assert barrier_superhedge_theoretical(100, 100, 1e12) == pytest.approx(100, rel=1e-9)
    with pytest.raises(ConfigError):
        barrier_superhedge_theoretical(100, 105, 105)
