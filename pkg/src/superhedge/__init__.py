"""Superhedging and quantile-hedging prices: exact tree oracles and neural approximations."""

__version__ = "0.1.0"

from .baseline import BsParams, barrier_superhedge_theoretical, bs_call_price, bs_delta, delta_hedge_simulate
from .claims import ClaimSpec, payoff, success_ratio
from .consumption import ConsumptionNets, price_process, train_consumption
from .hedger0 import EvalReport, HedgePolicy, TrainConfig, sweep_lambda, train_t0
from .market import (
    MarketModelConfig,
    PathBatch,
    enumerate_trinomial,
    increments,
    simulate_black_scholes,
    simulate_trinomial,
)
from .oracle import (
    one_step_superhedge,
    quantile_curve,
    quantile_price_bruteforce,
    sup_martingale_expectation,
    superhedge_price_tree,
)
