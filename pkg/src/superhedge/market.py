"""Discrete-time market models: trinomial and log-Euler Black-Scholes.

Prices are stored already discounted (numeraire 1). Arrays carry an asset
axis of length one so that ``prices`` has shape ``(n_paths, T + 1, 1)``.

Random numbers come from numpy's counter-based Philox generator. Paths are
produced in fixed-size blocks; block ``b`` uses the Philox key
``(seed, b)``, so the output does not depend on how many workers are used.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import ndtri

from .errors import ConfigError, EnumerationLimitError

BLOCK_SIZE = 1 << 15
DEFAULT_ENUMERATION_CAP = 3**13


@dataclass(frozen=True)
class MarketModelConfig:
    kind: Literal["trinomial", "black_scholes"]
    x0: float = 100.0
    horizon: int = 1
    # trinomial
    d: float = -0.01
    m: float = 0.0
    u: float = 0.01
    probs: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    # black-scholes
    sigma: float = 0.1
    mu: float = 0.0
    dt: float = 1 / 250

    def __post_init__(self):
        if self.kind not in ("trinomial", "black_scholes"):
            raise ConfigError(f"unknown market kind {self.kind!r}")
        if not self.x0 > 0:
            raise ConfigError(f"x0 must be positive, got {self.x0}")
        if int(self.horizon) != self.horizon or self.horizon < 0:
            raise ConfigError(f"horizon must be a non-negative integer, got {self.horizon}")
        if self.kind == "trinomial":
            if not -1 < self.d < self.m < self.u:
                raise ConfigError(f"need -1 < d < m < u, got d={self.d}, m={self.m}, u={self.u}")
            if not self.d < 0 < self.u:
                raise ConfigError("need d < 0 < u for an arbitrage-free trinomial model")
            p = np.asarray(self.probs, dtype=float)
            if p.shape != (3,) or np.any(p <= 0) or abs(p.sum() - 1) > 1e-12:
                raise ConfigError(f"probs must be three positive weights summing to 1, got {self.probs}")
        else:
            if not self.sigma > 0:
                raise ConfigError(f"sigma must be positive, got {self.sigma}")
            if not self.dt > 0:
                raise ConfigError(f"dt must be positive, got {self.dt}")

    @property
    def returns(self) -> np.ndarray:
        return np.array([self.d, self.m, self.u])


@dataclass(frozen=True)
class PathBatch:
    """A batch of discounted price paths.

    Attributes
    ----------
    prices : ndarray, shape (n_paths, T + 1, n_assets)
    probs : ndarray or None
        Exact path probabilities; set only by :func:`enumerate_trinomial`.
    seed : int or None
    """

    prices: np.ndarray
    probs: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        if prices.ndim == 2:
            prices = prices[:, :, None]
        if prices.ndim != 3:
            raise ValueError(f"prices must have shape (n, T+1, n_assets), got {prices.shape}")
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)
        if self.probs is not None:
            probs = np.asarray(self.probs, dtype=float)
            if probs.shape != (prices.shape[0],):
                raise ValueError("probs must have one entry per path")
            probs.setflags(write=False)
            object.__setattr__(self, "probs", probs)

    @property
    def n_paths(self) -> int:
        return self.prices.shape[0]

    @property
    def horizon(self) -> int:
        return self.prices.shape[1] - 1

    def subset(self, index) -> "PathBatch":
        probs = None if self.probs is None else self.probs[index]
        return PathBatch(self.prices[index], probs, self.seed)


def worker_count() -> int:
    """Worker cap from ``SUPERHEDGE_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("SUPERHEDGE_THREADS", "1")))
    except ValueError:
        return 1


def philox_generator(seed: int, block: int) -> np.random.Generator:
    """Philox stream keyed by ``(seed, block)``."""
    return np.random.Generator(np.random.Philox(key=(int(block) << 64) | (int(seed) & (2**64 - 1))))


def derive_seed(seed: int, *keys: int) -> int:
    """Independent 63-bit seed for a sub-task such as one training iteration."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *[int(k) for k in keys]])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def _open_uniforms(gen: np.random.Generator, shape) -> np.ndarray:
    # strictly inside (0, 1) so the inverse normal CDF stays finite
    k = gen.integers(0, 2**53, size=shape, dtype=np.int64)
    return (k + 0.5) / 2.0**53


def _simulate_blocks(n: int, seed: int, make_block) -> np.ndarray:
    starts = list(range(0, n, BLOCK_SIZE))

    def run(i):
        size = min(BLOCK_SIZE, n - starts[i])
        return make_block(philox_generator(seed, i), size)

    workers = min(worker_count(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            blocks = list(pool.map(run, range(len(starts))))
    else:
        blocks = [run(i) for i in range(len(starts))]
    return np.concatenate(blocks, axis=0)


def _check_count(n: int):
    if int(n) != n or n < 1:
        raise ConfigError(f"number of paths must be a positive integer, got {n}")


def _prepend_x0(x0: float, growth: np.ndarray) -> np.ndarray:
    n, T = growth.shape
    prices = np.empty((n, T + 1))
    prices[:, 0] = x0
    prices[:, 1:] = x0 * np.cumprod(growth, axis=1)
    return prices


def simulate_trinomial(cfg: MarketModelConfig, n: int, seed: int) -> PathBatch:
    """Simulate ``X_t = x0 * prod_{k<=t} (1 + R_k)`` with i.i.d. returns in {d, m, u}."""
    if cfg.kind != "trinomial":
        raise ConfigError("simulate_trinomial needs a trinomial config")
    _check_count(n)
    T = cfg.horizon
    edges = np.cumsum(cfg.probs)[:-1]
    factors = 1.0 + cfg.returns

    def block(gen, size):
        moves = np.searchsorted(edges, gen.random((size, T)), side="right")
        return factors[moves]

    growth = _simulate_blocks(n, seed, block) if T > 0 else np.empty((n, 0))
    return PathBatch(_prepend_x0(cfg.x0, growth), seed=seed)


def simulate_black_scholes(cfg: MarketModelConfig, n: int, seed: int) -> PathBatch:
    """Exact log-normal one-step scheme with normals drawn by inverse CDF."""
    if cfg.kind != "black_scholes":
        raise ConfigError("simulate_black_scholes needs a black_scholes config")
    _check_count(n)
    T = cfg.horizon
    drift = (cfg.mu - 0.5 * cfg.sigma**2) * cfg.dt
    vol = cfg.sigma * np.sqrt(cfg.dt)

    def block(gen, size):
        z = ndtri(_open_uniforms(gen, (size, T)))
        return np.exp(drift + vol * z)

    growth = _simulate_blocks(n, seed, block) if T > 0 else np.empty((n, 0))
    return PathBatch(_prepend_x0(cfg.x0, growth), seed=seed)


def simulate(cfg: MarketModelConfig, n: int, seed: int) -> PathBatch:
    if cfg.kind == "trinomial":
        return simulate_trinomial(cfg, n, seed)
    return simulate_black_scholes(cfg, n, seed)


def trinomial_moves(T: int) -> np.ndarray:
    """All move sequences in lexicographic order, shape (3**T, T); 0=d, 1=m, 2=u."""
    if T == 0:
        return np.zeros((1, 0), dtype=np.int8)
    return np.indices((3,) * T, dtype=np.int8).reshape(T, -1).T


def enumerate_trinomial(cfg: MarketModelConfig, cap: int = DEFAULT_ENUMERATION_CAP) -> PathBatch:
    """Every trinomial path with its exact probability.

    Paths are in lexicographic order of their moves (first move most
    significant), so values on the full tree can be reshaped to ``(3,) * T``.
    """
    if cfg.kind != "trinomial":
        raise ConfigError("enumerate_trinomial needs a trinomial config")
    T = cfg.horizon
    if 3**T > cap:
        raise EnumerationLimitError(
            f"3**{T} = {3**T} paths exceeds the enumeration cap {cap}; use simulation instead"
        )
    moves = trinomial_moves(T)
    growth = (1.0 + cfg.returns)[moves]
    probs = np.prod(np.asarray(cfg.probs)[moves], axis=1)
    return PathBatch(_prepend_x0(cfg.x0, growth), probs=probs)


def increments(batch: PathBatch) -> np.ndarray:
    """Price increments ``X_{k+1} - X_k``, shape (n_paths, T, n_assets)."""
    if batch.horizon < 1:
        raise ValueError("increments need at least one time step")
    return np.diff(batch.prices, axis=1)


def history_features(batch: PathBatch, t: int, width: int, scale: float = 0.1) -> np.ndarray:
    """Network input for the observed history ``(X_0, ..., X_t)``.

    Each observed price enters as ``log(X_s / X_0) / scale``; unobserved
    slots up to ``width`` are zero. Shape (n_paths, width * n_assets).
    """
    if t + 1 > width:
        raise ValueError(f"history of length {t + 1} does not fit width {width}")
    p = batch.prices
    n, _, a = p.shape
    out = np.zeros((n, width, a))
    out[:, : t + 1] = np.log(p[:, : t + 1] / p[:, :1]) / scale
    return out.reshape(n, width * a)
