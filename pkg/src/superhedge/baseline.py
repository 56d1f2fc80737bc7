"""Zero-rate Black-Scholes references: call price, delta, discrete delta hedging."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr

from .claims import ClaimSpec, payoff
from .errors import ConfigError
from .market import MarketModelConfig, PathBatch, increments, simulate_black_scholes


@dataclass(frozen=True)
class BsParams:
    spot: float
    strike: float
    sigma: float
    tau: float
    rate: float = 0.0

    def __post_init__(self):
        if min(self.spot, self.strike, self.sigma, self.tau) <= 0:
            raise ConfigError("spot, strike, sigma and tau must all be positive")
        if self.rate != 0:
            raise ConfigError("only a zero interest rate is supported")

    def call_price(self) -> float:
        return float(bs_call_price(self.spot, self.strike, self.sigma, self.tau))

    def delta(self) -> float:
        return float(bs_delta(self.spot, self.strike, self.sigma, self.tau))


def _d1(spot, strike, vol_sqrt_tau):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(spot / strike) / vol_sqrt_tau + 0.5 * vol_sqrt_tau


def bs_call_price(spot, strike, sigma, tau):
    """Call price with zero rate; falls back to the intrinsic value when ``sigma * sqrt(tau)`` is 0."""
    spot, strike = np.asarray(spot, dtype=float), np.asarray(strike, dtype=float)
    s = np.asarray(sigma, dtype=float) * np.sqrt(np.asarray(tau, dtype=float))
    d1 = _d1(spot, strike, s)
    price = np.where(s > 0, spot * ndtr(d1) - strike * ndtr(d1 - s), np.maximum(spot - strike, 0.0))
    return price[()]


def bs_delta(spot, strike, sigma, tau):
    """``N(d1)``; at zero remaining variance this is ``1{spot > strike}`` (1/2 at the money)."""
    spot, strike = np.asarray(spot, dtype=float), np.asarray(strike, dtype=float)
    s = np.asarray(sigma, dtype=float) * np.sqrt(np.asarray(tau, dtype=float))
    d1 = _d1(spot, strike, s)
    limit = np.where(spot > strike, 1.0, np.where(spot < strike, 0.0, 0.5))
    return np.where(s > 0, ndtr(d1), limit)[()]


class DeltaHedgeResult(NamedTuple):
    initial_cost: float
    alpha_hat: float


def delta_hedge_values(cfg: MarketModelConfig, strike: float, batch: PathBatch, timing: str = "end") -> np.ndarray:
    """Value of the discrete delta hedge started at the Black-Scholes price, shape (n, T + 1).

    The position held over step ``t -> t + 1`` is ``N(d1)`` at spot ``X_t``
    with remaining maturity ``tau - (t + 1) dt`` (``timing="end"``) or
    ``tau - t dt`` (``timing="start"``), where ``tau = T dt``.
    """
    if timing not in ("start", "end"):
        raise ValueError(f"timing must be 'start' or 'end', got {timing!r}")
    T = batch.horizon
    tau = T * cfg.dt
    x = batch.prices[:, :, 0]
    lag = 1 if timing == "end" else 0
    remaining = tau - (np.arange(T) + lag) * cfg.dt
    remaining = np.maximum(remaining, 0.0)
    deltas = bs_delta(x[:, :-1], strike, cfg.sigma, remaining[None, :])
    v0 = bs_call_price(cfg.x0, strike, cfg.sigma, tau)
    out = np.empty_like(x)
    out[:, 0] = v0
    out[:, 1:] = v0 + np.cumsum(deltas * increments(batch)[:, :, 0], axis=1)
    return out


def delta_hedge_simulate(cfg: MarketModelConfig, claim: ClaimSpec, n: int, seed: int, timing: str = "end") -> DeltaHedgeResult:
    """Initial cost and empirical superhedging probability of daily delta hedging."""
    if cfg.kind != "black_scholes":
        raise ConfigError("delta hedging needs a Black-Scholes market")
    if claim.kind != "european_call":
        raise ConfigError("delta hedging is implemented for European calls only")
    batch = simulate_black_scholes(cfg, n, seed)
    values = delta_hedge_values(cfg, claim.strike, batch, timing)
    alpha = float(np.mean(values[:, -1] >= payoff(claim, batch.prices)))
    return DeltaHedgeResult(float(values[0, 0]), alpha)


def barrier_superhedge_theoretical(x0: float, strike: float, barrier: float) -> float:
    """Superhedging price ``x0 * (1 - K / U)`` of an up-and-out call in a discretised Black-Scholes model."""
    if not strike < barrier:
        raise ConfigError(f"need K < U, got K={strike}, U={barrier}")
    if not x0 < barrier:
        raise ConfigError(f"need x0 < U, got x0={x0}, U={barrier}")
    return x0 * (1.0 - strike / barrier)
