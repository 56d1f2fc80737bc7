"""Up-and-out barrier call under a discretised Black-Scholes model.

With a very large penalty the learned price sits between the
continuous-time reference and the model-free bound X0 (1 - K/U).
"""
from superhedge import ClaimSpec, MarketModelConfig, TrainConfig, train_t0
from superhedge.baseline import barrier_superhedge_theoretical

cfg = MarketModelConfig("black_scholes", x0=100.0, horizon=30, sigma=0.3, mu=0.0, dt=1 / 250)
claim = ClaimSpec("barrier_up_out_call", strike=100.0, barrier=105.0)
policy, rep = train_t0(cfg, claim, None, TrainConfig(), lam=1e7)
print(f"learned price {rep.price:.4f}, test success rate {rep.alpha_hat:.4f}")
print(f"bound X0 (1 - K/U) = {barrier_superhedge_theoretical(100.0, 100.0, 105.0):.4f}")
