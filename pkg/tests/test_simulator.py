import numpy as np
import pytest

from constrained_lq.controller import backward_pass, predicted_cost
from constrained_lq.errors import NotPSD
from constrained_lq.instances import random_scenario
from constrained_lq.model import HARD, NONE, Mode
from constrained_lq.simulator import NoiseSampler, PathError, draw_noise, monte_carlo, rollout

from helpers import identity_scenario


def test_zero_noise_is_zero():
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert np.all(draw_noise(np.zeros((3, 3)), rng) == 0)


def test_noise_variance_fleet():
    sampler = NoiseSampler(3.0 * np.eye(50))
    rng = np.random.default_rng(42)
    draws = np.array([sampler.draw(rng) for _ in range(100_000)])
    var = draws.var(axis=0)
    assert np.all(np.abs(var - 3.0) <= 0.03 * 3.0)


def test_noise_dense_covariance():
    W = np.array([[2.0, 0.5], [0.5, 1.0]])
    rng = np.random.default_rng(1)
    draws = np.array([draw_noise(W, rng) for _ in range(50_000)])
    np.testing.assert_allclose(np.cov(draws.T), W, atol=0.05)


def test_noise_reproducible_and_psd_checked():
    a = [draw_noise(np.eye(2), np.random.default_rng(7)) for _ in range(2)]
    np.testing.assert_array_equal(a[0], a[1])
    with pytest.raises(NotPSD):
        NoiseSampler(np.diag([1.0, -1.0]))


def test_hard_rollout_forced_by_dynamics():
    sc = identity_scenario(1, [HARD], [2.5], x0=[1.0])
    rec = rollout(sc, backward_pass(sc), seed=0)
    assert rec.states[1, 0] == pytest.approx(3.5, abs=1e-13)
    assert rec.residuals.shape == (1,)
    assert rec.step_costs.shape == (2,)


def test_noisy_hard_residuals_pathwise():
    sc = random_scenario(np.random.default_rng(4), modes="hard", noise=True)
    gs = backward_pass(sc)
    for seed in range(20):
        rec = rollout(sc, gs, seed=seed)
        scale = np.maximum(1.0, np.abs(sc.schedule.targets))
        assert np.max(np.abs(rec.residuals) / scale) <= 1e-9


def test_two_agent_deterministic_cost_matches_value():
    sc = identity_scenario(2, [HARD, Mode.soft(3.0), NONE], [2.0, -1.0, 0.0], x0=[1.0, -2.0], refs=0.5)
    gs = backward_pass(sc)
    cost = rollout(sc, gs, deterministic=True).total_cost
    assert abs(cost - predicted_cost(gs, sc.x0)) <= 1e-8 * abs(cost)


def test_single_path_summary_is_that_path():
    sc = random_scenario(np.random.default_rng(2), noise=True)
    gs = backward_pass(sc)
    s = monte_carlo(sc, gs, 1, base_seed=5)
    from constrained_lq.simulator import path_rng
    rec = rollout(sc, gs, rng=path_rng(5, 0))
    assert s.n_paths == 1
    assert s.mean_cost == rec.total_cost
    assert s.cost_std_error == 0.0
    np.testing.assert_array_equal(s.mean_states, rec.states)


def test_zero_noise_std_error_is_zero():
    sc = random_scenario(np.random.default_rng(8), noise=False)
    s = monte_carlo(sc, backward_pass(sc), 25, base_seed=1)
    assert s.cost_std_error == 0.0


def test_seed_determinism_across_workers():
    sc = random_scenario(np.random.default_rng(9), noise=True, modes="mixed")
    gs = backward_pass(sc)
    a = monte_carlo(sc, gs, 64, base_seed=3, workers=1)
    b = monte_carlo(sc, gs, 64, base_seed=3, workers=4)
    np.testing.assert_array_equal(a.costs, b.costs)
    assert a.mean_cost == b.mean_cost and a.cost_std_error == b.cost_std_error
    np.testing.assert_array_equal(a.mean_states, b.mean_states)
    np.testing.assert_array_equal(a.mean_abs_soft_residual, b.mean_abs_soft_residual)


def test_monte_carlo_mean_matches_value_small():
    sc = identity_scenario(2, [HARD, Mode.soft(1.0), NONE, HARD], [1.0, 0.0, 0.0, -1.0],
                           x0=[0.5, 0.0], refs=1.0, a=0.9, w=0.5)
    gs = backward_pass(sc)
    s = monte_carlo(sc, gs, 4000, base_seed=0)
    assert abs(s.mean_cost - predicted_cost(gs, sc.x0)) <= 3 * s.cost_std_error


def test_path_errors_carry_index():
    sc = identity_scenario(1, [NONE], [0.0], w=1.0)
    gs = backward_pass(sc)
    with pytest.raises(ValueError):
        monte_carlo(sc, gs, 0)
    # a schedule for a different dimension fails inside the path worker
    other = backward_pass(identity_scenario(2, [NONE], [0.0]))
    with pytest.raises(PathError, match="path 0"):
        monte_carlo(sc, other, 2, workers=1)


def test_free_mode_tracks_reference_in_interior():
    T = 40
    sc = identity_scenario(3, [NONE] * T, np.zeros(T), refs=5.0, a=0.95, w=0.1)
    s = monte_carlo(sc, backward_pass(sc), 200, base_seed=0)
    mid = s.mean_states[T // 4: 3 * T // 4]
    assert np.max(np.abs(mid - 5.0)) < 0.5
