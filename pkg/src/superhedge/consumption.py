"""Consumption process of the uniform Doob decomposition and the price process.

Given a trained time-0 policy with price ``u`` and positions ``xi``, the
superhedging price process is ``U_t = u + sum_{k<=t} xi_k dX_k - B_t`` with
``B`` adapted, nondecreasing and ``B_0 = 0``. Here ``B`` is approximated by
per-time networks through the running maximum

    B_t = max(F_t(X_0..X_t), B_{t-1}),

each ``F_t`` trained (in order ``t = 1..T``, earlier nets frozen) to make
``B_t`` as large as possible while staying below the terminal surplus
``G = V_T - H`` of the base policy.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import nn
from .claims import ClaimSpec, payoff
from .errors import ConfigError, TrainingError
from .hedger0 import HedgePolicy, TrainConfig, portfolio_terminal, resolve_feature_scale, value_process
from .market import MarketModelConfig, PathBatch, derive_seed, history_features, simulate

FEASIBILITY_SLACK = 0.01


@dataclass
class ConsumptionNets:
    nets: list[nn.NetworkParams]
    beta: float
    base_policy: HedgePolicy
    feature_scale: float = 0.02
    feasibility: float | None = None

    @property
    def horizon(self) -> int:
        return self.base_policy.horizon


@dataclass
class PriceProcessSample:
    """Per-path trajectories for ``t = 0..T``; each array has shape (n, T + 1)."""

    U: np.ndarray
    B: np.ndarray
    gains: np.ndarray
    price: float


def gains_minus_claim(base_policy: HedgePolicy, batch: PathBatch, claim: ClaimSpec) -> np.ndarray:
    """Terminal surplus ``V_T - H`` of the base policy."""
    return portfolio_terminal(base_policy, batch) - payoff(claim, batch.prices)


def _net_output(net, batch, t, T, scale):
    return nn.forward(net, history_features(batch, t, T + 1, scale))[:, 0]


def consumption_path(nets: ConsumptionNets, batch: PathBatch, upto: int | None = None) -> np.ndarray:
    """``B_0..B_upto`` for every path (``upto`` defaults to the horizon); shape (n, upto + 1)."""
    T = nets.horizon
    upto = len(nets.nets) if upto is None else upto
    B = np.zeros((batch.n_paths, upto + 1))
    for t in range(1, upto + 1):
        B[:, t] = np.maximum(_net_output(nets.nets[t - 1], batch, t, T, nets.feature_scale), B[:, t - 1])
    return B


def loss_consumption_t(F_t, beta: float, G, B_prev) -> float:
    """Empirical loss ``mean(-B_t**2 + beta * max(B_t - G, 0))`` with ``B_t = max(F_t, B_prev)``.

    ``F_t`` are the raw network outputs at time ``t`` on the batch.
    """
    if not beta > 0:
        raise ConfigError("beta must be positive; with beta = 0 the loss is unbounded below")
    B = np.maximum(F_t, B_prev)
    return float(np.mean(-(B**2) + beta * np.maximum(B - G, 0.0)))


def _loss_grad_t(net, beta, features, G, B_prev):
    out, cache = nn.forward_with_cache(net, features)
    F = out[:, 0]
    B = np.maximum(F, B_prev)
    loss = np.mean(-(B**2) + beta * np.maximum(B - G, 0.0))
    dB = (-2.0 * B + beta * (B > G)) / len(F)
    # ties F == B_prev route the gradient through the network
    dF = np.where(F >= B_prev, dB, 0.0)
    grads, _ = nn.backward_from_cache(net, cache, dF[:, None])
    return float(loss), grads.arrays()


def train_consumption(
    cfg: MarketModelConfig,
    claim: ClaimSpec,
    base_policy: HedgePolicy,
    beta: float,
    train_cfg: TrainConfig,
) -> ConsumptionNets:
    """Train ``F_1..F_T`` one after the other on fresh batches.

    The returned object carries the test-set feasibility rate
    ``P(B_T <= G + 0.01)``.
    """
    if not beta > 0:
        raise ConfigError("beta must be positive; with beta = 0 the loss is unbounded below")
    T = cfg.horizon
    if base_policy.horizon != T:
        raise ValueError("base policy horizon does not match the market horizon")
    pool = simulate(cfg, train_cfg.n_samples, derive_seed(train_cfg.seed, 1))
    scale = resolve_feature_scale(train_cfg.feature_scale, pool)
    dims = [T + 1, *train_cfg.hidden, 1]
    # Start outputs at the typical positive surplus: below zero the running
    # max blocks all gradient, while the beta penalty pulls excess back down.
    surplus = gains_minus_claim(base_policy, pool.subset(slice(0, train_cfg.n_train)), claim)
    start = float(np.maximum(surplus, 0.0).mean())
    result = ConsumptionNets([], beta, base_policy, scale)
    for t in range(1, T + 1):
        net = nn.init_truncated_normal(dims, derive_seed(train_cfg.seed, 301, t), train_cfg.activation)
        net.biases[-1][:] = start
        params = net.arrays()
        state = nn.adam_init(params, train_cfg.lr)
        for i in range(train_cfg.iterations):
            batch = simulate(cfg, train_cfg.batch_size, derive_seed(train_cfg.seed, 3, t, i))
            G = gains_minus_claim(base_policy, batch, claim)
            B_prev = consumption_path(result, batch, upto=t - 1)[:, -1]
            loss, grads = _loss_grad_t(net, beta, history_features(batch, t, T + 1, scale), G, B_prev)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite consumption loss at t={t}, iteration {i}", iteration=i)
            state.lr = train_cfg.lr_at(i)
            state, params = nn.adam_step(state, params, grads)
            net = net.with_arrays(params)
        result.nets.append(net)
    test = pool.subset(slice(train_cfg.n_train, None))
    result.feasibility = feasibility_rate(result, test, claim)
    return result


def feasibility_rate(nets: ConsumptionNets, batch: PathBatch, claim: ClaimSpec, slack: float = FEASIBILITY_SLACK) -> float:
    G = gains_minus_claim(nets.base_policy, batch, claim)
    B_T = consumption_path(nets, batch)[:, -1]
    return float(np.mean(B_T <= G + slack))


def price_process(base_policy: HedgePolicy, nets: ConsumptionNets, batch: PathBatch) -> PriceProcessSample:
    V = value_process(base_policy, batch)
    B = consumption_path(nets, batch)
    return PriceProcessSample(V - B, B, V - base_policy.price, base_policy.price)


def write_trajectories(path, sample: PriceProcessSample, max_paths: int | None = None):
    """CSV with columns ``path_id, t, U, B, G`` where ``G`` is the cumulative trading gain."""
    n, T1 = sample.U.shape
    n = n if max_paths is None else min(n, max_paths)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path_id", "t", "U", "B", "G"])
        for j in range(n):
            for t in range(T1):
                w.writerow([j, t, repr(float(sample.U[j, t])), repr(float(sample.B[j, t])), repr(float(sample.gains[j, t]))])
