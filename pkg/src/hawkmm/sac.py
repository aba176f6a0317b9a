"""Soft actor-critic over box-valued actions, on the hand-rolled MLP core.

The actor outputs per-dimension Gaussian mean and log-std; actions are the
tanh-squashed sample mapped affinely onto the box. Twin critics with Polyak
targets, and the entropy temperature is tuned toward a fixed entropy target.
All loss gradients are derived by hand so they can be checked against finite
differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .nn import (
    Params,
    ReplayBuffer,
    _backward_cached_into,
    _backward_input_cached,
    _forward_cache,
    adam_init_arrays,
    adam_step_arrays,
    forward,
    init_mlp,
    make_flat,
    make_stacked_flat,
)

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
TANH_EPS = 1e-6
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Box:
    """Axis-aligned action bounds."""

    low: np.ndarray
    high: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "low", np.asarray(self.low, dtype=np.float64))
        object.__setattr__(self, "high", np.asarray(self.high, dtype=np.float64))
        if self.low.shape != self.high.shape or self.low.ndim != 1:
            raise ValueError(f"bad box shapes {self.low.shape}, {self.high.shape}")
        if not np.all(self.low < self.high):
            raise ValueError(f"box must have low < high, got {self.low}..{self.high}")

    @property
    def dim(self) -> int:
        return self.low.shape[0]

    @property
    def span(self) -> np.ndarray:
        return self.high - self.low

    def contains(self, a: np.ndarray) -> bool:
        return bool(np.all(a >= self.low) and np.all(a <= self.high))


def _policy_stats(actor: Params, obs: np.ndarray, xi: np.ndarray, box: Box) -> dict:
    """Evaluate the squashed policy at fixed noise xi.

    Returns mean/log-std (with the pre-clamp mask), the squashed action, and
    the per-sample log-density of that action under the policy.
    """
    return _policy_stats_from_out(forward(actor, obs), xi, box)


def _policy_stats_from_out(out: np.ndarray, xi: np.ndarray, box: Box) -> dict:
    k = box.dim
    mu = out[:, :k]
    raw_ls = out[:, k:]
    ls = np.clip(raw_ls, LOG_STD_MIN, LOG_STD_MAX)
    sigma = np.exp(ls)
    u = mu + sigma * xi
    t = np.tanh(u)
    den = 1.0 - t * t + TANH_EPS
    a = box.low + 0.5 * (t + 1.0) * box.span
    # log N(u; mu, sigma) minus the log-Jacobian of a = affine(tanh(u));
    # the per-dimension constants are folded into one scalar
    const = k * 0.5 * LOG_2PI + float(np.sum(np.log(0.5 * box.span)))
    logp = ls + 0.5 * (xi * xi)
    logp += np.log(den)
    logp = -(logp.sum(axis=1) + const)
    return {
        "mu": mu,
        "ls": ls,
        "ls_mask": (raw_ls > LOG_STD_MIN) & (raw_ls < LOG_STD_MAX),
        "sigma": sigma,
        "xi": xi,
        "t": t,
        "den": den,
        "action": a,
        "logp": logp,
    }


def squash(u: np.ndarray, box: Box) -> np.ndarray:
    return box.low + 0.5 * (np.tanh(u) + 1.0) * box.span


def sac_act(
    actor: Params,
    obs: np.ndarray,
    box: Box,
    deterministic: bool,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Sample (or take the mode of) the squashed policy for one observation."""
    out = forward(actor, obs)
    k = box.dim
    mu = out[:k]
    if deterministic:
        return squash(mu, box)
    if rng is None:
        raise ValueError("stochastic action needs an rng")
    sigma = np.exp(np.clip(out[k:], LOG_STD_MIN, LOG_STD_MAX))
    return squash(mu + sigma * rng.standard_normal(k), box)


# ---------------------------------------------------------------------------
# Losses (pure in their parameters, so finite differences can check them)
# ---------------------------------------------------------------------------


def critic_loss(q: Params, obs: np.ndarray, act: np.ndarray, y: np.ndarray) -> float:
    pred = forward(q, np.hstack([obs, act]))
    return float(np.mean((pred - y) ** 2))


def critic_loss_and_grads(
    q: Params, obs: np.ndarray, act: np.ndarray, y: np.ndarray,
    out: Params | None = None,
) -> tuple[float, Params]:
    return _critic_loss_grads_from_inp(q, np.hstack([obs, act]), y, out)


def _critic_loss_grads_from_inp(
    q: Params, inp: np.ndarray, y: np.ndarray, out: Params | None
) -> tuple[float, Params]:
    acts, zs = _forward_cache(q, inp)
    err = acts[-1] - y
    if out is None:
        out = [(np.empty_like(w), np.empty_like(b)) for w, b in q]
    _backward_cached_into(q, acts, zs, (2.0 / err.shape[0]) * err, out)
    return float(np.mean(err**2)), out


def actor_loss(
    actor: Params,
    q1: Params,
    q2: Params,
    log_alpha: float,
    obs: np.ndarray,
    xi: np.ndarray,
    box: Box,
) -> float:
    st = _policy_stats(actor, obs, xi, box)
    inp = np.hstack([obs, st["action"]])
    qmin = np.minimum(forward(q1, inp), forward(q2, inp))[:, 0]
    return float(np.mean(math.exp(log_alpha) * st["logp"] - qmin))


def actor_loss_and_grads(
    actor: Params,
    q1: Params,
    q2: Params,
    log_alpha: float,
    obs: np.ndarray,
    xi: np.ndarray,
    box: Box,
    out: Params | None = None,
) -> tuple[float, Params, np.ndarray]:
    """Gradient of mean(alpha * logp - min Q) through the reparameterized action.

    Also returns the per-sample logp (used by the temperature update).
    """
    acts_a, zs_a = _forward_cache(actor, obs)
    st = _policy_stats_from_out(acts_a[-1], xi, box)
    alpha = math.exp(log_alpha)
    batch = obs.shape[0]
    inp = np.hstack([obs, st["action"]])
    acts1, zs1 = _forward_cache(q1, inp)
    acts2, zs2 = _forward_cache(q2, inp)
    q1v, q2v = acts1[-1], acts2[-1]
    qmin = np.minimum(q1v, q2v)[:, 0]
    loss = float(np.mean(alpha * st["logp"] - qmin))

    # d(-mean qmin)/d action, routing each sample through its argmin critic
    pick1 = (q1v <= q2v).astype(np.float64)
    scale = -1.0 / batch
    dx1 = _backward_input_cached(q1, zs1, pick1 * scale)
    dx2 = _backward_input_cached(q2, zs2, (1.0 - pick1) * scale)
    obs_dim = obs.shape[1]
    dloss_da = (dx1 + dx2)[:, obs_dim:]

    t, den, sigma, xi_ = st["t"], st["den"], st["sigma"], st["xi"]
    dlogp_du = 2.0 * t * (1.0 - t * t) / den
    da_du = 0.5 * box.span * (1.0 - t * t)
    du_dls = sigma * xi_
    up_mu = (alpha / batch) * dlogp_du + dloss_da * da_du
    up_ls = ((alpha / batch) * (dlogp_du * du_dls - 1.0) + dloss_da * da_du * du_dls)
    up_ls *= st["ls_mask"]
    if out is None:
        out = [(np.empty_like(w), np.empty_like(b)) for w, b in actor]
    _backward_cached_into(actor, acts_a, zs_a, np.hstack([up_mu, up_ls]), out)
    return loss, out, st["logp"]


def alpha_loss_and_grad(
    log_alpha: float, logp: np.ndarray, target_entropy: float
) -> tuple[float, float]:
    """Temperature objective -log_alpha * mean(logp + target_entropy)."""
    gap = float(np.mean(logp) + target_entropy)
    return -log_alpha * gap, -gap


# ---------------------------------------------------------------------------
# Stacked twin-critic fast path (one batched matmul drives both critics;
# numerically equivalent to the per-net loss functions above, which remain
# the finite-difference-checked reference)
# ---------------------------------------------------------------------------

Stacked = list[tuple[np.ndarray, np.ndarray]]  # [(W(k,out,in), b(k,out)), ...]


def _transposed_weights(stacked: Stacked) -> list[np.ndarray]:
    """Contiguous (k, in, out) copies; batched GEMM is slower on strided views."""
    return [np.ascontiguousarray(w.transpose(0, 2, 1)) for w, _ in stacked]


def _refresh_transposed(stacked: Stacked, wt: list[np.ndarray]) -> None:
    for (w, _), t in zip(stacked, wt):
        np.copyto(t, w.transpose(0, 2, 1))


def _stacked_forward(
    stacked: Stacked, inp: np.ndarray, wt: list[np.ndarray] | None = None
) -> np.ndarray:
    last = len(stacked) - 1
    a = inp
    for i, (w, b) in enumerate(stacked):
        a = np.matmul(a, wt[i] if wt is not None else w.transpose(0, 2, 1))
        a += b[:, None, :]
        if i < last:
            np.maximum(a, 0.0, out=a)
    return a


def _stacked_forward_cache(
    stacked: Stacked, inp: np.ndarray, wt: list[np.ndarray] | None = None
) -> tuple[list, list]:
    last = len(stacked) - 1
    acts = [inp]
    zs = []
    for i, (w, b) in enumerate(stacked):
        z = np.matmul(acts[-1], wt[i] if wt is not None else w.transpose(0, 2, 1))
        z += b[:, None, :]
        zs.append(z)
        acts.append(np.maximum(z, 0.0) if i < last else z)
    return acts, zs


def _stacked_backward_into(
    stacked: Stacked, acts: list, zs: list, g: np.ndarray, out: Stacked
) -> None:
    for i in range(len(stacked) - 1, -1, -1):
        gw, gb = out[i]
        np.matmul(g.transpose(0, 2, 1), acts[i], out=gw)
        g.sum(axis=1, out=gb)
        if i > 0:
            g = np.matmul(g, stacked[i][0])
            g *= zs[i - 1] > 0


def _stacked_input_backward(stacked: Stacked, zs: list, g: np.ndarray) -> np.ndarray:
    for i in range(len(stacked) - 1, -1, -1):
        g = np.matmul(g, stacked[i][0])
        if i > 0:
            g = g * (zs[i - 1] > 0)
    return g


def _stacked_critic_losses_and_grads(
    stacked: Stacked, inp: np.ndarray, y: np.ndarray, out: Stacked,
    wt: list[np.ndarray] | None = None,
) -> tuple[float, float]:
    """MSE loss per critic; gradients (summed-to-mean scale) into ``out``."""
    acts, zs = _stacked_forward_cache(stacked, inp, wt)
    err = acts[-1] - y[None]
    _stacked_backward_into(stacked, acts, zs, (2.0 / inp.shape[0]) * err, out)
    return float(np.mean(err[0] ** 2)), float(np.mean(err[1] ** 2))


def _stacked_actor_loss_and_grads(
    actor: Params,
    q_stacked: Stacked,
    log_alpha: float,
    obs: np.ndarray,
    xi: np.ndarray,
    box: Box,
    out: Params,
    wt: list[np.ndarray] | None = None,
) -> tuple[float, np.ndarray]:
    """Same objective and gradients as actor_loss_and_grads, with the twin
    critics evaluated through the stacked storage."""
    acts_a, zs_a = _forward_cache(actor, obs)
    st = _policy_stats_from_out(acts_a[-1], xi, box)
    alpha = math.exp(log_alpha)
    batch = obs.shape[0]
    inp = np.concatenate([obs, st["action"]], axis=1)
    acts_q, zs_q = _stacked_forward_cache(q_stacked, inp, wt)
    qv = acts_q[-1]
    qmin = np.minimum(qv[0], qv[1])[:, 0]
    loss = float(np.mean(alpha * st["logp"] - qmin))

    pick1 = qv[0] <= qv[1]
    picks = np.stack([pick1, ~pick1]).astype(np.float64)
    picks *= -1.0 / batch
    dx = _stacked_input_backward(q_stacked, zs_q, picks)
    dloss_da = (dx[0] + dx[1])[:, obs.shape[1]:]

    t, den, sigma, xi_ = st["t"], st["den"], st["sigma"], st["xi"]
    dlogp_du = 2.0 * t * (1.0 - t * t) / den
    da_du = 0.5 * box.span * (1.0 - t * t)
    du_dls = sigma * xi_
    up_mu = (alpha / batch) * dlogp_du + dloss_da * da_du
    up_ls = ((alpha / batch) * (dlogp_du * du_dls - 1.0) + dloss_da * da_du * du_dls)
    up_ls *= st["ls_mask"]
    _backward_cached_into(actor, acts_a, zs_a, np.hstack([up_mu, up_ls]), out)
    return loss, st["logp"]


# ---------------------------------------------------------------------------
# Agent
# ---------------------------------------------------------------------------


class SacAgent:
    kind = "sac"

    def __init__(
        self,
        obs_dim: int,
        box: Box,
        hidden: tuple[int, ...] = (64, 64),
        lr: float = 3e-4,
        gamma: float = 0.99,
        tau: float = 0.005,
        target_entropy: float | None = None,
        buffer_capacity: int = 100_000,
        batch_size: int = 64,
        seed: int = 0,
    ):
        self.obs_dim = obs_dim
        self.box = box
        self.hidden = tuple(hidden)
        self.lr = lr
        self.gamma = gamma
        self.tau = tau
        k = box.dim
        self.target_entropy = float(-k) if target_entropy is None else target_entropy
        self.batch_size = batch_size

        ss = np.random.SeedSequence(seed)
        init_rng = np.random.default_rng(ss.spawn(1)[0])
        self.rng = np.random.default_rng(ss.spawn(1)[0])
        # the actor lives in one flat buffer; the twin critics share a stacked
        # buffer so both are driven by single batched matmuls
        self._actor_flat, self.actor = make_flat(init_mlp([obs_dim, *hidden, 2 * k], init_rng))
        q_init = [init_mlp([obs_dim + k, *hidden, 1], init_rng) for _ in range(2)]
        self._q_flat, self._q_stacked, (self.q1, self.q2) = make_stacked_flat(q_init)
        self._qt_flat, self._qt_stacked, (self.q1_targ, self.q2_targ) = make_stacked_flat(q_init)
        self._gactor_flat, self._gactor = make_flat(self.actor)
        self._gq_flat, self._gq_stacked, _ = make_stacked_flat(q_init)
        self._q_wt = _transposed_weights(self._q_stacked)
        self._qt_wt = _transposed_weights(self._qt_stacked)
        self.log_alpha = np.zeros(1)

        self.opt_actor = adam_init_arrays([self._actor_flat])
        self.opt_q = adam_init_arrays([self._q_flat])
        self._alpha_m = self._alpha_v = 0.0
        self._alpha_t = 0
        self._inp_buf = np.empty((batch_size, obs_dim + k))
        self.buffer = ReplayBuffer(buffer_capacity, obs_dim, act_dim=k)

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha[0]))

    def load_params(
        self,
        actor: Params,
        q1: Params,
        q2: Params,
        q1_targ: Params,
        q2_targ: Params,
        log_alpha: float,
    ) -> None:
        """Copy checkpointed values in, preserving the flat-buffer views."""
        from .nn import assign_params

        assign_params(self.actor, actor)
        assign_params(self.q1, q1)
        assign_params(self.q2, q2)
        assign_params(self.q1_targ, q1_targ)
        assign_params(self.q2_targ, q2_targ)
        _refresh_transposed(self._q_stacked, self._q_wt)
        _refresh_transposed(self._qt_stacked, self._qt_wt)
        self.log_alpha[0] = log_alpha

    def act(self, obs: np.ndarray, deterministic: bool = False,
            rng: np.random.Generator | None = None) -> np.ndarray:
        return sac_act(self.actor, obs, self.box,
                       deterministic, self.rng if rng is None else rng)

    def train_step(self, batch: dict[str, np.ndarray] | None = None) -> dict[str, float]:
        """One gradient step on both critics, the actor, and the temperature."""
        if batch is None:
            batch = self.buffer.sample(self.batch_size, self.rng)
        obs, act = batch["obs"], batch["act"]
        nobs = batch["next_obs"]
        n = obs.shape[0]
        k = self.box.dim
        obs_dim = self.obs_dim
        inp = self._inp_buf if n == self._inp_buf.shape[0] else np.empty((n, obs_dim + k))

        # bootstrap target from the target critics and a fresh next action
        xi2 = self.rng.standard_normal((n, k))
        st2 = _policy_stats(self.actor, nobs, xi2, self.box)
        inp[:, :obs_dim] = nobs
        inp[:, obs_dim:] = st2["action"]
        qt = _stacked_forward(self._qt_stacked, inp, self._qt_wt)
        qt_min = np.minimum(qt[0], qt[1])[:, 0]
        y = (batch["rew"] + self.gamma * (1.0 - batch["done"])
             * (qt_min - self.alpha * st2["logp"]))[:, None]

        inp[:, :obs_dim] = obs
        inp[:, obs_dim:] = act
        l1, l2 = _stacked_critic_losses_and_grads(
            self._q_stacked, inp, y, self._gq_stacked, self._q_wt
        )
        adam_step_arrays([self._q_flat], [self._gq_flat], self.opt_q, self.lr)
        _refresh_transposed(self._q_stacked, self._q_wt)

        xi = self.rng.standard_normal((n, k))
        la, logp = _stacked_actor_loss_and_grads(
            self.actor, self._q_stacked, float(self.log_alpha[0]), obs, xi, self.box,
            out=self._gactor, wt=self._q_wt,
        )
        adam_step_arrays([self._actor_flat], [self._gactor_flat], self.opt_actor, self.lr)

        lalpha, galpha = alpha_loss_and_grad(
            float(self.log_alpha[0]), logp, self.target_entropy
        )
        self._alpha_t += 1
        self._alpha_m = 0.9 * self._alpha_m + 0.1 * galpha
        self._alpha_v = 0.999 * self._alpha_v + 0.001 * galpha * galpha
        mhat = self._alpha_m / (1.0 - 0.9 ** self._alpha_t)
        vhat = self._alpha_v / (1.0 - 0.999 ** self._alpha_t)
        self.log_alpha[0] -= self.lr * mhat / (math.sqrt(vhat) + 1e-8)

        # Polyak averaging, one fused op for both stacked target critics
        self._qt_flat *= 1.0 - self.tau
        self._qt_flat += self.tau * self._q_flat
        _refresh_transposed(self._qt_stacked, self._qt_wt)
        return {
            "critic1": l1,
            "critic2": l2,
            "actor": la,
            "alpha": lalpha,
            "entropy": float(-np.mean(logp)),
        }
