import numpy as np
import pytest
from scipy.optimize import linprog

from superhedge.claims import ClaimSpec, payoff
from superhedge.errors import ArbitrageError, EnumerationLimitError
from superhedge.market import MarketModelConfig, enumerate_trinomial, increments, trinomial_moves
from superhedge.oracle import (
    one_step_superhedge,
    quantile_curve,
    quantile_price_bruteforce,
    sup_martingale_expectation,
    superhedge_price_tree,
)

from conftest import tiny_trinomial

CALL = ClaimSpec("european_call", strike=100.0)


def lp_oracle(x0, children):
    """Independent route: min u s.t. u + xi (x_i - x0) >= h_i, via HiGHS."""
    A = [[-1.0, -(x - x0)] for x, _ in children]
    b = [-h for _, h in children]
    res = linprog([1.0, 0.0], A_ub=A, b_ub=b, bounds=[(None, None), (None, None)], method="highs")
    assert res.status == 0
    return res.fun


def test_one_step_examples():
    r = one_step_superhedge(100.0, [(99, 0), (100, 0), (101, 1)])
    assert r.price == pytest.approx(0.5, abs=1e-12)
    assert r.strategy == pytest.approx(0.5, abs=1e-12)
    assert set(r.binding) == {0, 2}
    r = one_step_superhedge(100.0, [(99, 1), (101, 0)])
    assert r.price == pytest.approx(0.5, abs=1e-12)
    assert r.strategy == pytest.approx(-0.5, abs=1e-12)


def test_one_step_constant_claim():
    r = one_step_superhedge(100.0, [(98, 3.0), (100, 3.0), (103, 3.0)])
    assert r.price == pytest.approx(3.0)
    assert r.strategy == 0.0


def test_one_step_arbitrage():
    with pytest.raises(ArbitrageError):
        one_step_superhedge(100.0, [(101, 0), (102, 1)])


def test_one_step_against_linprog(rng):
    for _ in range(200):
        k = rng.integers(2, 5)
        xs = np.sort(rng.uniform(90, 110, k))
        x0 = rng.uniform(xs[0], xs[-1])
        hs = rng.uniform(0, 5, k)
        children = list(zip(xs, hs))
        r = one_step_superhedge(x0, children)
        assert r.price == pytest.approx(lp_oracle(x0, children), abs=1e-8)
        assert np.all(r.price + r.strategy * (xs - x0) >= hs - 1e-10)


def test_one_step_redundant_child(rng):
    for _ in range(100):
        xs = np.array([95.0, 100.0, 106.0])
        hs = rng.uniform(0, 3, 3)
        base = one_step_superhedge(100.0, list(zip(xs, hs)))
        # a point strictly below the chord through its neighbours
        x_new = rng.uniform(95.5, 105.5)
        i = np.searchsorted(xs, x_new)
        chord = hs[i - 1] + (hs[i] - hs[i - 1]) * (x_new - xs[i - 1]) / (xs[i] - xs[i - 1])
        h_new = min(chord, base.price + base.strategy * (x_new - 100.0)) - rng.uniform(0.01, 1)
        extended = one_step_superhedge(100.0, list(zip(xs, hs)) + [(x_new, h_new)])
        assert extended.price == pytest.approx(base.price, abs=1e-12)


def test_ref_trinomial_price(ref_trinomial):
    assert abs(superhedge_price_tree(ref_trinomial, CALL).price - 2.17) <= 0.005


def test_binomial_formula_cross_check(ref_trinomial):
    # the dual optimum for a convex payoff charges only the d and u moves with weight 1/2
    from math import comb

    T = 29
    expected = sum(comb(T, k) * 0.5**T * max(100 * 1.01**k * 0.99 ** (T - k) - 100, 0) for k in range(T + 1))
    assert superhedge_price_tree(ref_trinomial, CALL).price == pytest.approx(expected, abs=1e-10)


def test_one_period_tree():
    assert superhedge_price_tree(tiny_trinomial(1), CALL).price == pytest.approx(0.5, abs=1e-12)


def test_zero_claim():
    sol = superhedge_price_tree(tiny_trinomial(4), ClaimSpec("zero"))
    assert sol.price == 0.0
    assert all(np.all(np.nan_to_num(s) == 0) for s in sol.strategy)


def test_sup_martingale_one_period_bruteforce():
    cfg = tiny_trinomial(1)
    h = payoff(CALL, enumerate_trinomial(cfg).prices)
    # martingale measures: q_d = q_u = q, q_m = 1 - 2q, q in [0, 1/2]
    qs = np.linspace(0, 0.5, 100001)
    brute = np.max(qs * h[0] + (1 - 2 * qs) * h[1] + qs * h[2])
    assert sup_martingale_expectation(cfg, h) == pytest.approx(brute, abs=1e-12)
    assert sup_martingale_expectation(cfg, h) == pytest.approx(0.5, abs=1e-12)


def _random_cfg(rng, T):
    d = -rng.uniform(0.005, 0.05)
    u = rng.uniform(0.005, 0.05)
    m = rng.uniform(d, u) * 0.9
    probs = rng.dirichlet([2, 2, 2])
    return MarketModelConfig("trinomial", x0=100.0, horizon=T, d=d, m=m, u=u, probs=tuple(probs / probs.sum()))


def test_duality_random_instances(rng):
    for i in range(30):
        T = int(rng.integers(1, 7))
        cfg = _random_cfg(rng, T)
        K = rng.uniform(90, 110)
        for claim in (ClaimSpec("european_call", strike=K), ClaimSpec("barrier_up_out_call", strike=K, barrier=K + rng.uniform(1, 15))):
            primal = superhedge_price_tree(cfg, claim).price
            dual = sup_martingale_expectation(cfg, payoff(claim, enumerate_trinomial(cfg).prices))
            assert abs(primal - dual) <= 1e-9
            assert dual >= 0


@pytest.mark.parametrize("claim", [CALL, ClaimSpec("barrier_up_out_call", strike=100, barrier=102.5)])
def test_strategy_replays(claim):
    cfg = tiny_trinomial(6)
    sol = superhedge_price_tree(cfg, claim)
    batch = enumerate_trinomial(cfg)
    xi = sol.positions(trinomial_moves(6))
    v = sol.price + (xi * increments(batch)[:, :, 0]).sum(axis=1)
    assert np.all(v >= payoff(claim, batch.prices) - 1e-9)


def test_lattice_and_full_tree_agree():
    cfg = tiny_trinomial(5)
    lat = superhedge_price_tree(cfg, CALL, method="lattice")
    tree = superhedge_price_tree(cfg, CALL, method="tree")
    assert lat.price == pytest.approx(tree.price, abs=1e-12)
    moves = trinomial_moves(5)
    assert np.allclose(lat.positions(moves), tree.positions(moves), atol=1e-9)


def test_path_dependent_cap():
    barrier = ClaimSpec("barrier_up_out_call", strike=100, barrier=110)
    with pytest.raises(EnumerationLimitError):
        superhedge_price_tree(tiny_trinomial(14), barrier)


def test_quantile_examples():
    cfg = tiny_trinomial(1)
    assert quantile_price_bruteforce(cfg, CALL, 0.6) == 0.0
    assert quantile_price_bruteforce(cfg, CALL, 1.0) == pytest.approx(0.5, abs=1e-12)
    assert quantile_price_bruteforce(cfg, CALL, 0.7) == pytest.approx(0.5, abs=1e-12)


def test_quantile_refuses_large_trees():
    with pytest.raises(EnumerationLimitError, match="neural"):
        quantile_price_bruteforce(tiny_trinomial(3), CALL, 0.9)


def test_quantile_curve_examples():
    curve = quantile_curve(tiny_trinomial(1), CALL, [0.5, 2 / 3, 0.9, 1.0])
    assert np.allclose(curve.prices, [0, 0, 0.5, 0.5], atol=1e-12)
    zero = quantile_curve(tiny_trinomial(2), ClaimSpec("zero"), [0.2, 0.5, 1.0])
    assert np.all(zero.prices == 0)


@pytest.mark.parametrize("T", [1, 2])
def test_quantile_curve_monotone(T, rng):
    cfg = _random_cfg(rng, T)
    grid = np.sort(rng.uniform(0.01, 1.0, 12))
    curve = quantile_curve(cfg, ClaimSpec("european_call", strike=99.5), np.append(grid, 1.0))
    assert np.all(np.diff(curve.prices) >= -1e-12)
    assert abs(curve.prices[-1] - curve.superhedge_price) <= 1e-12
