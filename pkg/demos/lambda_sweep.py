"""Trade-off between price and hedging probability.

Trains one hedging policy per penalty weight on the trinomial call and
prints the empirical success probability next to the learned price.
A full sweep at the default sizes takes about 15 minutes on one core;
pass --quick for a smaller run.
"""
import sys

from superhedge import ClaimSpec, MarketModelConfig, TrainConfig, superhedge_price_tree
from superhedge.hedger0 import sweep_lambda
from superhedge.svgplot import plot

quick = "--quick" in sys.argv
cfg = MarketModelConfig("trinomial", x0=100.0, horizon=29, d=-0.01, m=0.0, u=0.01)
call = ClaimSpec("european_call", strike=100.0)
tc = TrainConfig(n_samples=40_000, epochs=5) if quick else TrainConfig()

reports = sweep_lambda(cfg, call, [10, 50, 100, 500, 1000, 2000, 4000, 10000], tc)
print(f"oracle superhedging price {superhedge_price_tree(cfg, call).price:.4f}")
print("lambda      price   alpha")
for r in reports:
    print(f"{r.lam:<10g} {r.price:.4f}  {r.alpha_hat:.4f}")

plot("lambda-curves", {"lambda": [r.lam for r in reports], "price": [r.price for r in reports],
                       "alpha": [r.alpha_hat for r in reports]}, "lambda_curves.svg")
plot("loss-histogram", {f"lambda={r.lam:g}": r.loss_samples for r in reports[::3]}, "loss_histogram.svg")
print("wrote lambda_curves.svg, loss_histogram.svg")
