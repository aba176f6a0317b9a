"""Deep Q-learning for the discrete quoting agents (2 or 4 actions)."""

from __future__ import annotations

import numpy as np

from .nn import (
    Params,
    ReplayBuffer,
    _backward_cached_into,
    _forward_cache,
    adam_init_arrays,
    adam_step_arrays,
    assign_params,
    forward,
    init_mlp,
    make_flat,
)


def linear_epsilon(
    step: int,
    total_steps: int,
    start: float = 1.0,
    end: float = 0.05,
    decay_fraction: float = 0.2,
) -> float:
    """Exploration rate: linear from start to end over the first
    decay_fraction of training, then flat."""
    horizon = max(1, int(total_steps * decay_fraction))
    frac = min(1.0, step / horizon)
    return start + frac * (end - start)


def dqn_loss(
    q: Params,
    q_target: Params,
    batch: dict[str, np.ndarray],
    gamma: float,
    delta: float = 1.0,
) -> float:
    qs = forward(q, batch["obs"])
    q_sa = qs[np.arange(qs.shape[0]), batch["act"]]
    y = batch["rew"] + gamma * (1.0 - batch["done"]) * forward(
        q_target, batch["next_obs"]
    ).max(axis=1)
    err = q_sa - y
    abs_err = np.abs(err)
    huber = np.where(abs_err <= delta, 0.5 * err * err, delta * (abs_err - 0.5 * delta))
    return float(np.mean(huber))


def dqn_loss_and_grads(
    q: Params,
    q_target: Params,
    batch: dict[str, np.ndarray],
    gamma: float,
    delta: float = 1.0,
    out: Params | None = None,
) -> tuple[float, Params]:
    obs, act = batch["obs"], batch["act"]
    n = obs.shape[0]
    acts, zs = _forward_cache(q, obs)
    qs = acts[-1]
    rows = np.arange(n)
    q_sa = qs[rows, act]
    y = batch["rew"] + gamma * (1.0 - batch["done"]) * forward(
        q_target, batch["next_obs"]
    ).max(axis=1)
    err = q_sa - y
    abs_err = np.abs(err)
    huber = np.where(abs_err <= delta, 0.5 * err * err, delta * (abs_err - 0.5 * delta))
    upstream = np.zeros_like(qs)
    upstream[rows, act] = np.clip(err, -delta, delta) / n
    if out is None:
        out = [(np.empty_like(w), np.empty_like(b)) for w, b in q]
    _backward_cached_into(q, acts, zs, upstream, out)
    return float(np.mean(huber)), out


class DqnAgent:
    kind = "dqn"

    def __init__(
        self,
        obs_dim: int,
        n_actions: int,
        hidden: tuple[int, ...] = (64, 64),
        lr: float = 1e-4,
        gamma: float = 0.99,
        target_period: int = 500,
        buffer_capacity: int = 100_000,
        batch_size: int = 64,
        seed: int = 0,
    ):
        if n_actions < 2:
            raise ValueError(f"need >= 2 actions, got {n_actions}")
        self.obs_dim = obs_dim
        self.n_actions = n_actions
        self.hidden = tuple(hidden)
        self.lr = lr
        self.gamma = gamma
        self.target_period = target_period
        self.batch_size = batch_size

        ss = np.random.SeedSequence(seed)
        init_rng = np.random.default_rng(ss.spawn(1)[0])
        self.rng = np.random.default_rng(ss.spawn(1)[0])
        self._q_flat, self.q = make_flat(init_mlp([obs_dim, *hidden, n_actions], init_rng))
        self._qt_flat, self.q_target = make_flat(self.q)
        self._g_flat, self._g = make_flat(self.q)
        self.opt = adam_init_arrays([self._q_flat])
        self.buffer = ReplayBuffer(buffer_capacity, obs_dim, discrete=True)
        self._updates = 0

    def load_params(self, q: Params, q_target: Params) -> None:
        """Copy checkpointed values in, preserving the flat-buffer views."""
        assign_params(self.q, q)
        assign_params(self.q_target, q_target)

    def act(self, obs: np.ndarray, epsilon: float = 0.0,
            rng: np.random.Generator | None = None) -> int:
        """Epsilon-greedy action; greedy ties break toward the lowest index."""
        rng = self.rng if rng is None else rng
        if epsilon > 0 and rng.random() < epsilon:
            return int(rng.integers(self.n_actions))
        return int(np.argmax(forward(self.q, obs)))

    def train_step(self, batch: dict[str, np.ndarray] | None = None) -> float:
        if batch is None:
            batch = self.buffer.sample(self.batch_size, self.rng)
        loss, _ = dqn_loss_and_grads(self.q, self.q_target, batch, self.gamma, out=self._g)
        adam_step_arrays([self._q_flat], [self._g_flat], self.opt, self.lr)
        self._updates += 1
        if self._updates % self.target_period == 0:
            self._qt_flat[...] = self._q_flat
        return loss
