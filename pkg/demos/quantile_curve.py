"""Quantile hedging prices on tiny trees.

Brute force over success sets gives the price needed to hedge with
probability at least alpha; the curve climbs to the superhedging price.
"""
import numpy as np

from superhedge import ClaimSpec, MarketModelConfig
from superhedge.oracle import quantile_curve

call = ClaimSpec("european_call", strike=100.0)
for T in (1, 2):
    cfg = MarketModelConfig("trinomial", x0=100.0, horizon=T, d=-0.01, m=0.0, u=0.01)
    curve = quantile_curve(cfg, call, np.round(np.linspace(0.1, 1.0, 10), 2))
    print(f"T={T} (superhedging price {curve.superhedge_price:.4f})")
    for a, p in zip(curve.alphas, curve.prices):
        print(f"  alpha {a:4.2f}  price {p:.4f}")
