"""Superhedging price process for t > 0.

A t=0 policy is trained first; consumption networks then learn how much
of the surplus can be withdrawn at each date while staying hedged. The
resulting trajectories U_t = price + gains - B_t go to trajectories.csv
and price_process.svg.
"""
import numpy as np

from superhedge import ClaimSpec, MarketModelConfig, TrainConfig, train_t0
from superhedge.consumption import price_process, train_consumption, write_trajectories
from superhedge.market import simulate
from superhedge.svgplot import plot

cfg = MarketModelConfig("black_scholes", x0=100.0, horizon=10, sigma=0.1, mu=0.0, dt=1 / 250)
call = ClaimSpec("european_call", strike=100.0)
tc = TrainConfig()

base, rep = train_t0(cfg, call, None, tc, lam=1024)
print(f"t=0 price {rep.price:.4f}, success rate {rep.alpha_hat:.4f}")
nets = train_consumption(cfg, call, base, beta=500.0, train_cfg=tc)
print(f"feasibility P(B_T <= G + 0.01) = {nets.feasibility:.4f}")

sample = price_process(base, nets, simulate(cfg, 50, seed=11))
print(f"mean terminal consumption {np.mean(sample.B[:, -1]):.4f}")
write_trajectories("trajectories.csv", sample)
plot("price-process", sample.U, "price_process.svg")
