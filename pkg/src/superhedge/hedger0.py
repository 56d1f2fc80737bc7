"""Neural approximation of the time-0 superhedging price and strategy.

The price is a trainable scalar ``u`` and the position held over
``(k-1, k]`` is a network ``F_k`` of the observed history ``X_0..X_{k-1}``.
Training minimises

    u**2 + lam * mean( max(H - V_T, 0)**2 ),   V_T = u + sum_k F_k * dX_k,

with Adam on freshly simulated batches. Large ``lam`` pushes the price up to
the superhedging price; smaller ``lam`` gives quantile-hedging prices.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import nn
from .claims import ClaimSpec, payoff
from .errors import ConfigError, TrainingError
from .market import MarketModelConfig, PathBatch, derive_seed, history_features, increments, simulate

log = logging.getLogger(__name__)


@dataclass
class HedgePolicy:
    price: float
    nets: list[nn.NetworkParams]
    C: float | None = None
    lam: float = 1.0
    feature_scale: float = 0.1

    def __post_init__(self):
        if self.C is not None and not self.C > 0:
            raise ConfigError(f"truncation bound must be positive, got {self.C}")
        if not self.lam > 0:
            raise ConfigError(f"lambda must be positive, got {self.lam}")

    @property
    def horizon(self) -> int:
        return len(self.nets)

    def arrays(self) -> list[np.ndarray]:
        out = [np.array([self.price])]
        for net in self.nets:
            out += net.arrays()
        return out

    def with_arrays(self, arrays) -> "HedgePolicy":
        nets, pos = [], 1
        for net in self.nets:
            k = len(net.arrays())
            nets.append(net.with_arrays(arrays[pos : pos + k]))
            pos += k
        return HedgePolicy(float(arrays[0][0]), nets, self.C, self.lam, self.feature_scale)


@dataclass(frozen=True)
class TrainConfig:
    n_samples: int = 200_000
    batch_size: int = 1024
    epochs: int = 10
    lr: float = 1e-2
    lr_final: float | None = 1e-4
    seed: int = 0
    split: float = 0.7
    hidden: tuple[int, ...] = (30, 30)
    activation: str = "swish"
    feature_scale: float | str = "auto"
    truncation: float | None = None
    price_init: str | float = "mean_payoff"
    lambda_start: float | None = 10.0
    lambda_warmup: float = 0.5

    def __post_init__(self):
        if not 0 < self.split < 1:
            raise ConfigError(f"split must lie in (0, 1), got {self.split}")
        if not 1 <= self.batch_size <= self.n_samples:
            raise ConfigError("need 1 <= batch_size <= n_samples")
        if self.epochs < 1 or not self.lr > 0:
            raise ConfigError("epochs must be >= 1 and lr > 0")
        if self.lr_final is not None and not self.lr_final > 0:
            raise ConfigError("lr_final must be positive")

    def lambda_at(self, lam: float, i: int) -> float:
        """Penalty weight at iteration ``i``: geometric ramp from ``lambda_start`` to ``lam``.

        The ramp covers the first ``lambda_warmup`` fraction of iterations;
        afterwards (or when ``lambda_start`` is unset) the weight is ``lam``.
        """
        if self.lambda_start is None or self.lambda_start >= lam:
            return lam
        ramp = self.lambda_warmup * self.iterations
        if i >= ramp:
            return lam
        return self.lambda_start * (lam / self.lambda_start) ** (i / ramp)

    def lr_at(self, i: int) -> float:
        """Geometric interpolation from ``lr`` to ``lr_final`` over the run (constant if unset)."""
        if self.lr_final is None or self.iterations < 2:
            return self.lr
        return self.lr * (self.lr_final / self.lr) ** (i / (self.iterations - 1))

    @property
    def n_train(self) -> int:
        return int(round(self.split * self.n_samples))

    @property
    def iterations(self) -> int:
        return self.epochs * max(1, self.n_train // self.batch_size)


@dataclass
class EvalReport:
    price: float
    alpha_hat: float
    loss_samples: np.ndarray
    lam: float
    n_test: int
    seed: int

    def csv_row(self) -> dict:
        return {"lambda": self.lam, "price": self.price, "alpha_hat": self.alpha_hat,
                "n_test": self.n_test, "seed": self.seed}


def resolve_feature_scale(scale, pool: PathBatch) -> float:
    """``"auto"`` means half the standard deviation of ``log(X_T / X_0)`` over ``pool``."""
    if scale != "auto":
        return float(scale)
    spread = np.std(np.log(pool.prices[:, -1] / pool.prices[:, 0]))
    return float(0.5 * spread) if spread > 0 else 1.0


def init_policy(T: int, train_cfg: TrainConfig, lam: float, price: float = 0.0, n_assets: int = 1,
                feature_scale: float | None = None) -> HedgePolicy:
    dims = [T * n_assets, *train_cfg.hidden, n_assets]
    nets = [nn.init_truncated_normal(dims, derive_seed(train_cfg.seed, 101, k), train_cfg.activation) for k in range(T)]
    scale = train_cfg.feature_scale if feature_scale is None else feature_scale
    return HedgePolicy(price, nets, train_cfg.truncation, lam, 0.1 if scale == "auto" else float(scale))


def zero_policy(T: int, price: float, hidden=(30, 30), n_assets: int = 1, lam: float = 1.0) -> HedgePolicy:
    """Policy holding no risky asset: all strategy weights are zero."""
    dims = [T * n_assets, *hidden, n_assets]
    net = nn.NetworkParams([np.zeros((o, i)) for i, o in zip(dims[:-1], dims[1:])], [np.zeros(o) for o in dims[1:]])
    return HedgePolicy(price, [net.copy() for _ in range(T)], None, lam)


def _positions(policy: HedgePolicy, batch: PathBatch, keep_cache: bool = False):
    """Raw and truncated network outputs, each of shape (n, T, n_assets)."""
    T = policy.horizon
    raw, caches = [], []
    for k, net in enumerate(policy.nets):
        x = history_features(batch, k, T, policy.feature_scale)
        if keep_cache:
            out, cache = nn.forward_with_cache(net, x)
            caches.append(cache)
        else:
            out = nn.forward(net, x)
        raw.append(out)
    raw = np.stack(raw, axis=1)
    held = raw if policy.C is None else nn.truncate(raw, policy.C)
    return raw, held, caches


def _check_horizon(policy: HedgePolicy, batch: PathBatch):
    if batch.horizon != policy.horizon:
        raise ValueError(f"batch horizon {batch.horizon} does not match policy horizon {policy.horizon}")


def positions(policy: HedgePolicy, batch: PathBatch) -> np.ndarray:
    """Positions actually held (after truncation), shape (n, T, n_assets)."""
    _check_horizon(policy, batch)
    return _positions(policy, batch)[1]


def value_process(policy: HedgePolicy, batch: PathBatch) -> np.ndarray:
    """Portfolio value ``u + sum_{k<=t} xi_k * dX_k`` for ``t = 0..T``, shape (n, T + 1)."""
    _check_horizon(policy, batch)
    gains = (positions(policy, batch) * increments(batch)).sum(axis=2)
    out = np.empty((batch.n_paths, policy.horizon + 1))
    out[:, 0] = policy.price
    out[:, 1:] = policy.price + np.cumsum(gains, axis=1)
    return out


def portfolio_terminal(policy: HedgePolicy, batch: PathBatch) -> np.ndarray:
    _check_horizon(policy, batch)
    _, held, _ = _positions(policy, batch)
    return policy.price + (held * increments(batch)).sum(axis=(1, 2))


def shortfall_penalty(x):
    """Squared rectifier ``max(x, 0)**2``."""
    return np.maximum(x, 0.0) ** 2


def loss_lambda(policy: HedgePolicy, batch: PathBatch, claim: ClaimSpec) -> float:
    if batch.n_paths == 0:
        raise ValueError("empty batch")
    short = payoff(claim, batch.prices) - portfolio_terminal(policy, batch)
    return float(policy.price**2 + policy.lam * shortfall_penalty(short).mean())


def loss_and_grad(policy: HedgePolicy, batch: PathBatch, claim: ClaimSpec):
    """Loss and its gradient, laid out like :meth:`HedgePolicy.arrays`."""
    _check_horizon(policy, batch)
    raw, held, caches = _positions(policy, batch, keep_cache=True)
    dX = increments(batch)
    V = policy.price + (held * dX).sum(axis=(1, 2))
    short = payoff(claim, batch.prices) - V
    N = batch.n_paths
    loss = policy.price**2 + policy.lam * shortfall_penalty(short).mean()
    dV = -2.0 * policy.lam / N * np.maximum(short, 0.0)
    grads = [np.array([2.0 * policy.price + dV.sum()])]
    up_all = dV[:, None, None] * dX
    if policy.C is not None:
        up_all = up_all * nn.truncate_grad(raw, policy.C)
    for k, net in enumerate(policy.nets):
        g, _ = nn.backward_from_cache(net, caches[k], up_all[:, k, :])
        grads += g.arrays()
    return float(loss), grads


def evaluate(policy: HedgePolicy, batch: PathBatch, claim: ClaimSpec, seed: int = 0) -> EvalReport:
    """Superhedging performance ``V_T - H`` on ``batch``; a zero shortfall counts as success."""
    perf = portfolio_terminal(policy, batch) - payoff(claim, batch.prices)
    return EvalReport(policy.price, float(np.mean(perf >= 0)), perf, policy.lam, batch.n_paths, seed)


def train_t0(
    cfg: MarketModelConfig,
    claim: ClaimSpec,
    policy_init: HedgePolicy | None,
    train_cfg: TrainConfig,
    lam: float | None = None,
    log_every: int = 0,
):
    """Train price and strategy networks; returns ``(policy, test report)``.

    Each Adam step uses a freshly simulated batch. A pool of
    ``train_cfg.n_samples`` paths is drawn once; its last ``1 - split``
    fraction is the test set used for the returned report.
    """
    T = cfg.horizon
    if T < 1:
        raise ConfigError("training needs a horizon of at least one step")
    pool = simulate(cfg, train_cfg.n_samples, derive_seed(train_cfg.seed, 1))
    test = pool.subset(slice(train_cfg.n_train, None))
    if policy_init is None:
        lam = 1.0 if lam is None else lam
        price0 = train_cfg.price_init
        if price0 == "mean_payoff":
            price0 = float(payoff(claim, pool.prices[: train_cfg.n_train]).mean())
        scale = resolve_feature_scale(train_cfg.feature_scale, pool.subset(slice(0, train_cfg.n_train)))
        policy = init_policy(T, train_cfg, lam, float(price0), pool.prices.shape[2], scale)
    else:
        policy = policy_init if lam is None else HedgePolicy(policy_init.price, policy_init.nets, policy_init.C, lam, policy_init.feature_scale)
    _check_horizon(policy, test)
    target_lam = policy.lam
    params = policy.arrays()
    state = nn.adam_init(params, train_cfg.lr)
    for i in range(train_cfg.iterations):
        batch = simulate(cfg, train_cfg.batch_size, derive_seed(train_cfg.seed, 2, i))
        policy.lam = train_cfg.lambda_at(target_lam, i)
        loss, grads = loss_and_grad(policy, batch, claim)
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite loss at iteration {i}", iteration=i)
        state.lr = train_cfg.lr_at(i)
        state, params = nn.adam_step(state, params, grads)
        policy = policy.with_arrays(params)
        if log_every and i % log_every == 0:
            log.info("iter %d loss %.6g price %.4f", i, loss, policy.price)
    policy.lam = target_lam
    return policy, evaluate(policy, test, claim, train_cfg.seed)


def sweep_lambda(cfg: MarketModelConfig, claim: ClaimSpec, lambdas, train_cfg: TrainConfig) -> list[EvalReport]:
    """Independent training per lambda, each with its own derived seed; sorted by lambda."""
    reports = []
    for lam in sorted(lambdas):
        sub = TrainConfig(**{**train_cfg.__dict__, "seed": derive_seed(train_cfg.seed, 7, int(round(lam * 1000)))})
        reports.append(train_t0(cfg, claim, None, sub, lam=lam)[1])
    return reports


# --- policy checkpoint -------------------------------------------------------
# little-endian: b"SHPL", u32 version, u32 T, f64 price, f64 C (NaN if unset),
# f64 lambda, f64 feature_scale, then T network records in the nn format.

POLICY_MAGIC = b"SHPL"


def save_policy(path, policy: HedgePolicy):
    C = np.nan if policy.C is None else policy.C
    head = POLICY_MAGIC + struct.pack("<II4d", 1, policy.horizon, policy.price, C, policy.lam, policy.feature_scale)
    Path(path).write_bytes(head + b"".join(nn.params_to_bytes(n) for n in policy.nets))


def load_policy(path) -> HedgePolicy:
    buf = Path(path).read_bytes()
    if buf[:4] != POLICY_MAGIC:
        raise ValueError("not a policy checkpoint (bad magic)")
    version, T, price, C, lam, scale = struct.unpack_from("<II4d", buf, 4)
    if version != 1:
        raise ValueError(f"unsupported policy checkpoint version {version}")
    pos, nets = 4 + struct.calcsize("<II4d"), []
    for _ in range(T):
        net, pos = nn.params_from_bytes(buf, pos)
        nets.append(net)
    return HedgePolicy(price, nets, None if np.isnan(C) else C, lam, scale)
