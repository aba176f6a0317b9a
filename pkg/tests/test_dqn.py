import numpy as np
import pytest
from gradcheck import finite_diff, relative_error

from hawkmm.dqn import DqnAgent, dqn_loss, dqn_loss_and_grads, linear_epsilon
from hawkmm.nn import Transition, forward, init_mlp


def random_batch(rng, n, obs_dim, n_actions):
    return {
        "obs": rng.standard_normal((n, obs_dim)),
        "act": rng.integers(0, n_actions, n),
        "rew": rng.standard_normal(n),
        "next_obs": rng.standard_normal((n, obs_dim)),
        "done": (rng.random(n) < 0.3).astype(np.float64),
    }


class TestAct:
    def test_greedy_argmax(self):
        agent = DqnAgent(obs_dim=2, n_actions=2, hidden=(4,), seed=0)
        agent.q = [(np.zeros((4, 2)), np.zeros(4)), (np.zeros((2, 4)), np.array([0.1, 0.9]))]
        assert agent.act(np.zeros(2), epsilon=0.0) == 1

    def test_tie_breaks_to_lowest_index(self):
        agent = DqnAgent(obs_dim=2, n_actions=2, hidden=(4,), seed=0)
        agent.q = [(np.zeros((4, 2)), np.zeros(4)), (np.zeros((2, 4)), np.array([0.5, 0.5]))]
        assert agent.act(np.zeros(2), epsilon=0.0) == 0

    def test_full_exploration_uniform(self):
        agent = DqnAgent(obs_dim=2, n_actions=4, seed=1)
        rng = np.random.default_rng(1)
        n = 100_000
        counts = np.bincount(
            [agent.act(np.zeros(2), epsilon=1.0, rng=rng) for _ in range(n)], minlength=4
        )
        sd = np.sqrt(n * 0.25 * 0.75)
        assert np.all(np.abs(counts - n * 0.25) < 3 * sd)


class TestLoss:
    def test_terminal_target_is_reward(self):
        rng = np.random.default_rng(2)
        q = init_mlp([3, 8, 2], rng)
        qt = init_mlp([3, 8, 2], rng)
        batch = random_batch(rng, 16, 3, 2)
        batch["done"] = np.ones(16)
        qs = forward(q, batch["obs"])
        q_sa = qs[np.arange(16), batch["act"]]
        err = q_sa - batch["rew"]  # target collapses to r when done
        expected = np.mean(
            np.where(np.abs(err) <= 1.0, 0.5 * err**2, np.abs(err) - 0.5)
        )
        assert dqn_loss(q, qt, batch, gamma=0.99) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_gradient_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        q = init_mlp([4, 6, 5, 3], rng)
        qt = init_mlp([4, 6, 5, 3], rng)
        batch = random_batch(rng, 8, 4, 3)
        _, analytic = dqn_loss_and_grads(q, qt, batch, gamma=0.9)
        numeric = finite_diff(lambda: dqn_loss(q, qt, batch, gamma=0.9), q)
        assert relative_error(analytic, numeric) < 1e-4

    def test_loss_nonincreasing_on_fixed_batch(self):
        rng = np.random.default_rng(5)
        agent = DqnAgent(obs_dim=3, n_actions=2, seed=5, lr=1e-4)
        batch = random_batch(rng, 64, 3, 2)
        losses = [agent.train_step(batch) for _ in range(100)]
        # target refresh changes y; compare against a stable target horizon
        assert losses[99] <= losses[0]
        diffs = np.diff(losses[:100])
        assert np.all(diffs <= 1e-12)


class TestEpsilonSchedule:
    def test_linear_decay(self):
        total = 10_000
        assert linear_epsilon(0, total) == 1.0
        assert linear_epsilon(1000, total) == pytest.approx(1.0 - 0.5 * 0.95)
        assert linear_epsilon(2000, total) == pytest.approx(0.05)
        assert linear_epsilon(9999, total) == pytest.approx(0.05)


class TestBandit:
    def test_two_armed_bandit_learns_better_arm(self):
        # quick 3-seed version; the 20-seed run lives in the acceptance suite
        wins = 0
        for seed in range(3):
            agent = DqnAgent(obs_dim=1, n_actions=2, hidden=(32, 32), seed=seed)
            rng = np.random.default_rng(seed)
            obs = np.zeros(1)
            for step in range(3000):
                eps = linear_epsilon(step, 3000)
                a = agent.act(obs, epsilon=eps, rng=rng)
                agent.buffer.push(Transition(obs, a, float(a == 1), obs, True))
                if len(agent.buffer) >= agent.batch_size:
                    agent.train_step()
            wins += agent.act(obs, epsilon=0.0) == 1
        assert wins >= 2

    def test_target_refresh_period(self):
        agent = DqnAgent(obs_dim=2, n_actions=2, target_period=5, seed=0)
        rng = np.random.default_rng(0)
        batch = random_batch(rng, 8, 2, 2)
        before = [w.copy() for w, _ in agent.q_target]
        for _ in range(4):
            agent.train_step(batch)
        for (w, _), w0 in zip(agent.q_target, before):
            np.testing.assert_array_equal(w, w0)  # unchanged until period hits
        agent.train_step(batch)
        changed = any(
            not np.array_equal(w, w0) for (w, _), w0 in zip(agent.q_target, before)
        )
        assert changed
