import numpy as np
import pytest

from superhedge import nn
from superhedge.claims import ClaimSpec, payoff
from superhedge.errors import TrainingError
from superhedge.hedger0 import (
    HedgePolicy,
    TrainConfig,
    evaluate,
    init_policy,
    load_policy,
    loss_and_grad,
    loss_lambda,
    portfolio_terminal,
    save_policy,
    sweep_lambda,
    train_t0,
    value_process,
    zero_policy,
)
from superhedge.market import PathBatch, simulate_trinomial

from conftest import tiny_trinomial

CALL = ClaimSpec("european_call", strike=100.0)
SMALL = TrainConfig(n_samples=4000, batch_size=256, epochs=3, seed=5, hidden=(8,))


def constant_policy(T, value, price=0.0, C=None, lam=1.0):
    """Every strategy net outputs ``value`` (zero weights, bias = value)."""
    pol = zero_policy(T, price, hidden=(4,), lam=lam)
    for net in pol.nets:
        net.biases[-1][:] = value
    pol.C = C
    return pol


def test_zero_nets_give_price():
    batch = simulate_trinomial(tiny_trinomial(3), 50, seed=0)
    pol = zero_policy(3, 1.25)
    assert np.all(portfolio_terminal(pol, batch) == 1.25)


def test_terminal_single_step_arithmetic():
    batch = PathBatch(np.array([[100.0, 101.0]]))
    assert portfolio_terminal(constant_policy(1, 0.5), batch)[0] == pytest.approx(0.5)
    assert portfolio_terminal(constant_policy(1, 0.5, C=0.1), batch)[0] == pytest.approx(0.1)


def test_horizon_mismatch():
    batch = simulate_trinomial(tiny_trinomial(2), 5, seed=0)
    with pytest.raises(ValueError):
        portfolio_terminal(zero_policy(3, 0.0), batch)


def test_loss_examples():
    batch = PathBatch(np.array([[100.0, 100.0]]))
    claim = ClaimSpec("european_call", strike=97.0)  # H = 3
    pol = zero_policy(1, 1.0, lam=10.0)
    assert loss_lambda(pol, batch, claim) == pytest.approx(1 + 10 * 4)
    assert loss_lambda(zero_policy(1, 3.5, lam=10.0), batch, claim) == pytest.approx(3.5**2)


def test_loss_monotone_in_shortfall():
    batch = simulate_trinomial(tiny_trinomial(2), 200, seed=1)
    losses = [loss_lambda(zero_policy(2, p, lam=50.0), batch, CALL) - p**2 for p in np.linspace(0, 3, 13)]
    assert np.all(np.diff(losses) <= 1e-12)


@pytest.mark.parametrize("C", [None, 0.3])
def test_loss_gradient_matches_finite_differences(C, rng):
    cfg = TrainConfig(hidden=(5,), seed=3, truncation=C, n_samples=100, batch_size=50)
    pol = init_policy(3, cfg, lam=100.0, price=0.4, feature_scale=0.02)
    batch = simulate_trinomial(tiny_trinomial(3), 64, seed=2)
    loss, grads = loss_and_grad(pol, batch, CALL)
    arrays = pol.arrays()
    h = 1e-6
    for a, g in zip(arrays, grads):
        for _ in range(3):
            idx = tuple(rng.integers(0, s) for s in a.shape)
            old = a[idx]
            a[idx] = old + h
            fp = loss_lambda(pol.with_arrays(arrays), batch, CALL)
            a[idx] = old - h
            fm = loss_lambda(pol.with_arrays(arrays), batch, CALL)
            a[idx] = old
            assert (fp - fm) / (2 * h) == pytest.approx(g[idx], rel=1e-4, abs=1e-6)


def test_value_process_consistent():
    batch = simulate_trinomial(tiny_trinomial(4), 30, seed=3)
    pol = init_policy(4, SMALL, lam=1.0, price=0.7, feature_scale=0.02)
    v = value_process(pol, batch)
    assert np.all(v[:, 0] == 0.7)
    assert np.allclose(v[:, -1], portfolio_terminal(pol, batch))


def test_alpha_hat_matches_loss_samples():
    batch = simulate_trinomial(tiny_trinomial(4), 500, seed=4)
    pol = init_policy(4, SMALL, lam=1.0, price=0.3, feature_scale=0.02)
    rep = evaluate(pol, batch, CALL)
    assert rep.alpha_hat == np.mean(rep.loss_samples >= 0)
    assert 0 <= rep.alpha_hat <= 1
    assert np.allclose(rep.loss_samples, portfolio_terminal(pol, batch) - payoff(CALL, batch.prices))


def test_train_reproducible():
    cfg = tiny_trinomial(3)
    _, a = train_t0(cfg, CALL, None, SMALL, lam=100.0)
    _, b = train_t0(cfg, CALL, None, SMALL, lam=100.0)
    assert a.price == b.price and a.alpha_hat == b.alpha_hat
    assert np.array_equal(a.loss_samples, b.loss_samples)


def test_zero_claim_needs_no_capital():
    cfg = tiny_trinomial(3)
    tc = TrainConfig(n_samples=20_000, batch_size=256, epochs=10, seed=1, hidden=(8,))
    pol, rep = train_t0(cfg, ClaimSpec("zero"), None, tc, lam=1e4)
    assert -0.05 <= rep.price <= 0.05
    # residual network positions leave shortfalls of order 1e-5, not exactly zero
    assert np.mean(rep.loss_samples >= -1e-3) == 1.0


def test_small_tree_price_below_oracle_bound():
    from superhedge.oracle import superhedge_price_tree

    cfg = tiny_trinomial(4)
    tc = TrainConfig(n_samples=30_000, batch_size=256, epochs=20, seed=2, hidden=(16,))
    _, rep = train_t0(cfg, CALL, None, tc, lam=1000.0)
    sup = superhedge_price_tree(cfg, CALL).price
    assert rep.price <= sup + 0.15
    assert rep.alpha_hat >= 0.7


def test_divergence_is_reported(monkeypatch):
    import superhedge.hedger0 as h0

    monkeypatch.setattr(h0, "loss_and_grad", lambda *a, **k: (float("nan"), None))
    with pytest.raises(TrainingError) as err:
        train_t0(tiny_trinomial(2), CALL, None, SMALL, lam=1.0)
    assert err.value.iteration == 0


def test_sweep_singleton_and_sorted():
    cfg = tiny_trinomial(2)
    tc = TrainConfig(n_samples=1000, batch_size=200, epochs=1, seed=0, hidden=(4,))
    assert len(sweep_lambda(cfg, CALL, [50.0], tc)) == 1
    reps = sweep_lambda(cfg, CALL, [100.0, 10.0], tc)
    assert [r.lam for r in reps] == [10.0, 100.0]
    assert reps[0].seed != reps[1].seed


def test_lambda_and_lr_schedules():
    tc = TrainConfig(n_samples=10_240, batch_size=1024, epochs=10, lr=1e-2, lr_final=1e-4, lambda_start=10.0, lambda_warmup=0.5)
    assert tc.iterations == 70
    assert tc.lr_at(0) == 1e-2 and tc.lr_at(69) == pytest.approx(1e-4)
    assert tc.lambda_at(1e4, 0) == 10.0
    assert tc.lambda_at(1e4, 35) == 1e4
    assert tc.lambda_at(5.0, 0) == 5.0
    lams = [tc.lambda_at(1e4, i) for i in range(70)]
    assert np.all(np.diff(lams) >= 0)


def test_policy_checkpoint_roundtrip(tmp_path):
    pol = init_policy(3, TrainConfig(truncation=2.0, hidden=(6, 6)), lam=123.0, price=1.5, feature_scale=0.02)
    save_policy(tmp_path / "p.bin", pol)
    q = load_policy(tmp_path / "p.bin")
    assert (q.price, q.C, q.lam, q.feature_scale, q.horizon) == (1.5, 2.0, 123.0, 0.02, 3)
    batch = simulate_trinomial(tiny_trinomial(3), 20, seed=0)
    assert np.array_equal(portfolio_terminal(pol, batch), portfolio_terminal(q, batch))
