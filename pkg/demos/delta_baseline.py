"""Black-Scholes delta hedging on a daily grid.

Starts from the continuous-time call price and rebalances once per day;
the discrete hedge misses the payoff on roughly half of the paths.
"""
from superhedge import ClaimSpec, MarketModelConfig
from superhedge.baseline import bs_call_price, delta_hedge_simulate, delta_hedge_values
from superhedge.market import simulate
from superhedge.svgplot import plot

cfg = MarketModelConfig("black_scholes", x0=100.0, horizon=30, sigma=0.1, mu=0.0, dt=1 / 250)
call = ClaimSpec("european_call", strike=100.0)
print(f"Black-Scholes price {float(bs_call_price(100.0, 100.0, 0.1, 30 / 250)):.4f}")
res = delta_hedge_simulate(cfg, call, 300_000, seed=0)
print(f"initial cost {res.initial_cost:.4f}, success rate {res.alpha_hat:.4f}")
plot("price-process", delta_hedge_values(cfg, 100.0, simulate(cfg, 50, seed=3)), "delta_process.svg")
