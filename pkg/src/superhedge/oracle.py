"""Exact superhedging and quantile-hedging prices on finite trinomial trees.

Two independent routes are provided. The primal route solves, at each node,
the one-period problem ``min u`` s.t. ``u + xi * (x_i - x0) >= h_i`` for all
children. The dual route maximises ``sum q_i v_i`` over one-step martingale
measures on the children. On a finite tree both give the superhedging price.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .claims import ClaimSpec, payoff
from .errors import ArbitrageError, ConfigError, EnumerationLimitError
from .market import DEFAULT_ENUMERATION_CAP, MarketModelConfig, enumerate_trinomial

FEAS_TOL = 1e-10
SUBSET_PATH_CAP = 9  # 2**9 subsets, i.e. T <= 2


@dataclass(frozen=True)
class NodeLPResult:
    price: float
    strategy: float
    binding: tuple[int, ...]


@dataclass(frozen=True)
class QuantileCurve:
    alphas: np.ndarray
    prices: np.ndarray
    superhedge_price: float


def _node_superhedge(x0, xs, hs):
    """Vectorised one-period superhedge.

    ``x0`` has shape (n,), ``xs`` and ``hs`` shape (n, k). Every vertex of the
    feasible region in the ``(xi, u)`` plane is the intersection of two
    constraint lines, so enumerating pairs (plus the flat ``xi = 0`` candidate)
    and keeping the cheapest feasible one is exact.
    """
    x0 = np.asarray(x0, dtype=float)
    dx = xs - x0[:, None]
    cand_xi = [np.zeros_like(x0)]
    cand_u = [hs.max(axis=1)]
    for i, j in combinations(range(xs.shape[1]), 2):
        xi = (hs[:, j] - hs[:, i]) / (xs[:, j] - xs[:, i])
        cand_xi.append(xi)
        cand_u.append(hs[:, i] - xi * dx[:, i])
    xi = np.stack(cand_xi, axis=1)
    u = np.stack(cand_u, axis=1)
    slack = u[:, :, None] + xi[:, :, None] * dx[:, None, :] - hs[:, None, :]
    tol = FEAS_TOL * (1.0 + np.abs(hs).max(axis=1))
    feasible = np.all(slack >= -tol[:, None, None], axis=2)
    u_f = np.where(feasible, u, np.inf)
    best = u_f.min(axis=1)
    # among (numerically) cheapest candidates prefer the smallest |xi|
    tied = u_f <= best[:, None] + tol[:, None]
    pick = np.argmin(np.where(tied, np.abs(xi), np.inf), axis=1)
    rows = np.arange(len(x0))
    return u[rows, pick], xi[rows, pick]


def _node_sup_martingale(x0, xs, vs):
    """Max of ``sum q_i v_i`` over measures on the children with mean ``x0``.

    Extreme points of that polytope charge at most two children, one on each
    side of ``x0``.
    """
    x0 = np.asarray(x0, dtype=float)
    best = np.full(x0.shape, -np.inf)
    for i, j in combinations(range(xs.shape[1]), 2):
        lo = np.minimum(xs[:, i], xs[:, j])
        hi = np.maximum(xs[:, i], xs[:, j])
        ok = (lo <= x0) & (x0 <= hi)
        qj = (x0 - xs[:, i]) / (xs[:, j] - xs[:, i])
        val = (1.0 - qj) * vs[:, i] + qj * vs[:, j]
        best = np.where(ok, np.maximum(best, val), best)
    return best


def _check_hull(x0, xs):
    if np.any(x0 < xs.min(axis=1) - 1e-12) or np.any(x0 > xs.max(axis=1) + 1e-12):
        raise ArbitrageError("spot lies outside the range of its children: the node admits arbitrage")


def one_step_superhedge(x0: float, children) -> NodeLPResult:
    """Cheapest one-period superhedge of payoffs ``h_i`` at child prices ``x_i``.

    Examples
    --------
    >>> r = one_step_superhedge(100.0, [(99, 0), (100, 0), (101, 1)])
    >>> round(r.price, 12), round(r.strategy, 12)
    (0.5, 0.5)
    """
    ch = np.asarray(children, dtype=float)
    if ch.ndim != 2 or ch.shape[1] != 2 or ch.shape[0] < 2:
        raise ValueError("children must be a list of at least two (x_i, h_i) pairs")
    xs, hs = ch[None, :, 0], ch[None, :, 1]
    if len(np.unique(xs)) != xs.shape[1]:
        raise ValueError("child prices must be distinct")
    x0a = np.array([float(x0)])
    _check_hull(x0a, xs)
    u, xi = _node_superhedge(x0a, xs, hs)
    u, xi = float(u[0]), float(xi[0])
    slack = u + xi * (xs[0] - x0) - hs[0]
    binding = tuple(int(i) for i in np.flatnonzero(np.abs(slack) <= 1e-9 * (1 + np.abs(hs[0]))))
    return NodeLPResult(u, xi, binding)


@dataclass(frozen=True)
class TreeSolution:
    """Time-0 superhedging price with the node-wise predictable strategy.

    ``strategy[t]`` holds the position carried from ``t`` to ``t + 1``.
    On the recombining lattice it is a ``(t + 1, t + 1)`` array indexed by
    ``(n_d, n_u)`` (NaN where ``n_d + n_u > t``). On the full tree it is a
    vector indexed by the lexicographic number of the move prefix.
    """

    price: float
    strategy: list
    lattice: bool

    def positions(self, moves: np.ndarray) -> np.ndarray:
        """Positions along paths given as move arrays (0=d, 1=m, 2=u), shape (n, T)."""
        moves = np.asarray(moves)
        n, T = moves.shape
        out = np.empty((n, T))
        if self.lattice:
            nd = np.zeros(n, dtype=int)
            nu = np.zeros(n, dtype=int)
            for t in range(T):
                out[:, t] = self.strategy[t][nd, nu]
                nd += moves[:, t] == 0
                nu += moves[:, t] == 2
        else:
            prefix = np.zeros(n, dtype=np.int64)
            for t in range(T):
                out[:, t] = self.strategy[t][prefix]
                prefix = prefix * 3 + moves[:, t]
        return out


def _require_trinomial(cfg: MarketModelConfig):
    if cfg.kind != "trinomial":
        raise ConfigError("the exact oracle needs a trinomial market")


def _lattice_superhedge(cfg: MarketModelConfig, claim: ClaimSpec) -> TreeSolution:
    T = cfg.horizon
    f_d, f_m, f_u = 1.0 + cfg.returns

    def level(t):
        nd, nu = np.meshgrid(np.arange(t + 1), np.arange(t + 1), indexing="ij")
        keep = nd + nu <= t
        nd, nu = nd[keep], nu[keep]
        x = cfg.x0 * f_d**nd * f_m ** (t - nd - nu) * f_u**nu
        return nd, nu, x

    nd, nu, x = level(T)
    value = np.full((T + 1, T + 1), np.nan)
    value[nd, nu] = payoff(claim, np.stack([np.full_like(x, cfg.x0), x], axis=1)) if claim.kind != "zero" else 0.0
    strategy = [None] * T
    for t in range(T - 1, -1, -1):
        nd, nu, x = level(t)
        xs = np.stack([x * f_d, x * f_m, x * f_u], axis=1)
        hs = np.stack([value[nd + 1, nu], value[nd, nu], value[nd, nu + 1]], axis=1)
        u, xi = _node_superhedge(x, xs, hs)
        value = np.full((t + 1, t + 1), np.nan)
        value[nd, nu] = u
        s = np.full((t + 1, t + 1), np.nan)
        s[nd, nu] = xi
        strategy[t] = s
    return TreeSolution(float(value[0, 0]), strategy, lattice=True)


def _tree_backward(cfg: MarketModelConfig, values: np.ndarray, node_op, cap: int):
    """Backward induction over the full tree; ``node_op(x0, xs, vs)`` returns node values (and optionally positions)."""
    batch = enumerate_trinomial(cfg, cap)
    T = cfg.horizon
    prices = batch.prices[:, :, 0]
    v = np.asarray(values, dtype=float)
    if v.shape != (3**T,):
        raise ValueError(f"expected {3**T} path values, got shape {v.shape}")
    extras = [None] * T
    for t in range(T - 1, -1, -1):
        x = prices[:: 3 ** (T - t), t]
        xs = prices[:: 3 ** (T - t - 1), t + 1].reshape(-1, 3)
        out = node_op(x, xs, v.reshape(-1, 3))
        if isinstance(out, tuple):
            v, extras[t] = out
        else:
            v = out
    return float(v[0]), extras


def superhedge_price_tree(
    cfg: MarketModelConfig,
    claim: ClaimSpec,
    method: str = "auto",
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> TreeSolution:
    """Superhedging price at time 0 by backward induction of one-period LPs.

    ``method="auto"`` uses the recombining lattice for path-independent
    claims and the full tree (bounded by ``cap`` leaves) otherwise.
    """
    _require_trinomial(cfg)
    if method not in ("auto", "lattice", "tree"):
        raise ValueError(f"unknown method {method!r}")
    if method == "lattice" and claim.path_dependent:
        raise ConfigError("a path-dependent claim cannot be priced on the recombining lattice")
    if cfg.horizon == 0:
        h = payoff(claim, [cfg.x0])
        return TreeSolution(float(h), [], lattice=not claim.path_dependent)
    if method == "lattice" or (method == "auto" and not claim.path_dependent):
        return _lattice_superhedge(cfg, claim)
    values = payoff(claim, enumerate_trinomial(cfg, cap).prices)
    price, strategy = _tree_backward(cfg, values, _node_superhedge, cap)
    return TreeSolution(price, strategy, lattice=False)


def sup_martingale_expectation(cfg: MarketModelConfig, claim_values, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """Sup of the expectation of ``claim_values`` over martingale measures on the full tree.

    ``claim_values`` follows the path order of :func:`enumerate_trinomial`.
    """
    _require_trinomial(cfg)
    if cfg.horizon == 0:
        return float(np.asarray(claim_values, dtype=float).reshape(-1)[0])
    price, _ = _tree_backward(cfg, claim_values, _node_sup_martingale, cap)
    return price


def quantile_price_bruteforce(cfg: MarketModelConfig, claim: ClaimSpec, alpha: float) -> float:
    """alpha-quantile hedging price by exhaustive search over success sets.

    Minimises the superhedging price of ``H * 1_A`` over all sets of paths
    ``A`` with probability at least ``alpha``. Only feasible for tiny trees.
    """
    _require_trinomial(cfg)
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    n = 3**cfg.horizon
    if n > SUBSET_PATH_CAP:
        raise EnumerationLimitError(
            f"{n} paths give 2**{n} success sets; brute force is limited to T <= 2. "
            "Use the neural-network estimator (train_t0) for larger trees."
        )
    batch = enumerate_trinomial(cfg)
    h = payoff(claim, batch.prices)
    probs = batch.probs
    best = np.inf
    for mask in range(1 << n):
        member = np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)
        if probs[member].sum() < alpha - 1e-12:
            continue
        best = min(best, sup_martingale_expectation(cfg, np.where(member, h, 0.0)))
    return float(best)


def quantile_curve(cfg: MarketModelConfig, claim: ClaimSpec, alpha_grid) -> QuantileCurve:
    alphas = np.asarray(alpha_grid, dtype=float)
    order = np.argsort(alphas)
    prices = np.empty_like(alphas)
    for idx in order:
        prices[idx] = quantile_price_bruteforce(cfg, claim, alphas[idx])
    sup_price = superhedge_price_tree(cfg, claim).price
    if np.any(np.diff(prices[order]) < -1e-12):
        raise RuntimeError("quantile prices are not monotone in alpha")
    at_one = alphas == 1.0
    if np.any(np.abs(prices[at_one] - sup_price) > 1e-12):
        raise RuntimeError("quantile price at alpha=1 differs from the superhedging price")
    return QuantileCurve(alphas, prices, sup_price)
