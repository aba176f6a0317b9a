"""Minimal dense network with exact reverse-mode gradients, Adam, and replay.

Parameters are a list of (W, b) pairs, W shaped (fan_out, fan_in), everything
float64. Hidden layers are ReLU, the output layer is linear. No framework:
the SAC/DQN losses need gradients we can finite-difference-check exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

Params = list[tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class NetSpec:
    """Layer sizes input -> hidden... -> output; ReLU hidden, identity output."""

    layer_sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.layer_sizes) < 2:
            raise ValueError(f"need >= 2 layers, got {self.layer_sizes}")
        if any(s < 1 for s in self.layer_sizes):
            raise ValueError(f"layer sizes must be >= 1, got {self.layer_sizes}")


def layer_sizes(params: Params) -> list[int]:
    return [params[0][0].shape[1]] + [w.shape[0] for w, _ in params]


def init_mlp(sizes: Sequence[int], rng: np.random.Generator) -> Params:
    """Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) init for weights and biases."""
    NetSpec(tuple(sizes))
    params: Params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        b = rng.uniform(-bound, bound, size=fan_out)
        params.append((w, b))
    return params


def _as_batch(x: np.ndarray, want: int, what: str) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != want:
        raise ValueError(f"{what} has shape {x.shape}, expected (*, {want})")
    return x, single


def forward(params: Params, x: np.ndarray) -> np.ndarray:
    """Apply the network to a single vector or a (batch, fan_in) matrix."""
    a, single = _as_batch(x, params[0][0].shape[1], "input")
    last = len(params) - 1
    for i, (w, b) in enumerate(params):
        a = a @ w.T + b
        if i < last:
            np.maximum(a, 0.0, out=a)
    return a[0] if single else a


def _forward_cache(params: Params, x: np.ndarray) -> tuple[list, list]:
    """Forward pass keeping activations and pre-activations (2-D input only)."""
    last = len(params) - 1
    acts = [x]
    zs = []
    for i, (w, b) in enumerate(params):
        z = acts[-1] @ w.T + b
        zs.append(z)
        acts.append(np.maximum(z, 0.0) if i < last else z)
    return acts, zs


def _backward_cached(
    params: Params, acts: list, zs: list, g: np.ndarray
) -> tuple[Params, np.ndarray]:
    grads: Params = [None] * len(params)  # type: ignore[list-item]
    for i in range(len(params) - 1, -1, -1):
        w, _ = params[i]
        grads[i] = (g.T @ acts[i], g.sum(axis=0))
        g = g @ w
        if i > 0:
            g = g * (zs[i - 1] > 0)
    return grads, g


def _backward_input_cached(params: Params, zs: list, g: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. the input only (no parameter gradients)."""
    for i in range(len(params) - 1, -1, -1):
        g = g @ params[i][0]
        if i > 0:
            g = g * (zs[i - 1] > 0)
    return g


def _backward_cached_into(
    params: Params, acts: list, zs: list, g: np.ndarray, out: Params
) -> np.ndarray:
    """Like _backward_cached but writes parameter gradients into ``out``."""
    for i in range(len(params) - 1, -1, -1):
        gw, gb = out[i]
        np.matmul(g.T, acts[i], out=gw)
        np.sum(g, axis=0, out=gb)
        g = g @ params[i][0]
        if i > 0:
            g = g * (zs[i - 1] > 0)
    return g


def make_flat(params: Params) -> tuple[np.ndarray, Params]:
    """Copy params into one contiguous buffer; returns (buffer, (W, b) views).

    Single-array optimizer and Polyak updates are much cheaper than updating
    each layer's arrays separately.
    """
    total = sum(w.size + b.size for w, b in params)
    flat = np.empty(total)
    views: Params = []
    off = 0
    for w, b in params:
        wv = flat[off:off + w.size].reshape(w.shape)
        wv[...] = w
        off += w.size
        bv = flat[off:off + b.size]
        bv[...] = b
        off += b.size
        views.append((wv, bv))
    return flat, views


def make_stacked_flat(
    nets: list[Params],
) -> tuple[np.ndarray, list[tuple[np.ndarray, np.ndarray]], list[Params]]:
    """Store k same-shape nets in one buffer, stacked per layer.

    Returns (flat buffer, [(W(k,out,in), b(k,out)) per layer], per-net (W, b)
    view lists). The stacked views feed batched matmuls so k nets cost one
    numpy call per layer; the per-net views stay valid Params.
    """
    k = len(nets)
    shapes = [(w.shape, b.shape) for w, b in nets[0]]
    for net in nets[1:]:
        if [(w.shape, b.shape) for w, b in net] != shapes:
            raise ValueError("stacked nets must share shapes")
    total = k * sum(w.size + b.size for w, b in nets[0])
    flat = np.empty(total)
    stacked: list[tuple[np.ndarray, np.ndarray]] = []
    per_net: list[Params] = [[] for _ in nets]
    off = 0
    for li, (w0, b0) in enumerate(nets[0]):
        wv = flat[off:off + k * w0.size].reshape(k, *w0.shape)
        off += k * w0.size
        bv = flat[off:off + k * b0.size].reshape(k, b0.size)
        off += k * b0.size
        for c, net in enumerate(nets):
            wv[c] = net[li][0]
            bv[c] = net[li][1]
            per_net[c].append((wv[c], bv[c]))
        stacked.append((wv, bv))
    return flat, stacked, per_net


def assign_params(dst: Params, src: Params) -> None:
    """Copy values layer by layer (keeps flat-buffer views intact)."""
    if len(dst) != len(src):
        raise ValueError(f"layer count mismatch: {len(dst)} != {len(src)}")
    for i, ((wd, bd), (ws, bs)) in enumerate(zip(dst, src)):
        if wd.shape != ws.shape or bd.shape != bs.shape:
            raise ValueError(
                f"layer {i}: shape mismatch {ws.shape}/{bs.shape} "
                f"vs {wd.shape}/{bd.shape}"
            )
        wd[...] = ws
        bd[...] = bs


def backward(
    params: Params, x: np.ndarray, upstream: np.ndarray
) -> tuple[Params, np.ndarray]:
    """Exact gradients of sum(upstream * forward(params, x)).

    Returns ((dW, db) per layer, d/dx). Parameter gradients are summed over
    the batch; scale the upstream by 1/batch for means.
    """
    a, single = _as_batch(x, params[0][0].shape[1], "input")
    g, g_single = _as_batch(upstream, params[-1][0].shape[0], "upstream")
    if single != g_single or a.shape[0] != g.shape[0]:
        raise ValueError(
            f"input batch {a.shape[0]} != upstream batch {g.shape[0]}"
        )
    acts, zs = _forward_cache(params, a)
    grads, g = _backward_cached(params, acts, zs, g)
    return grads, (g[0] if single else g)


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    scratch: list[np.ndarray]
    t: int = 0


def adam_init_arrays(arrays: Sequence[np.ndarray]) -> AdamState:
    return AdamState(
        m=[np.zeros_like(a) for a in arrays],
        v=[np.zeros_like(a) for a in arrays],
        scratch=[np.zeros_like(a) for a in arrays],
    )


def adam_step_arrays(
    arrays: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """Canonical Adam with bias correction, updating ``arrays`` in place.

    Uses the algebraically equivalent form
    p -= lr*sqrt(c2)/c1 * m / (sqrt(v) + eps*sqrt(c2)) to avoid temporaries.
    """
    state.t += 1
    c1 = 1.0 - beta1 ** state.t
    sqrt_c2 = np.sqrt(1.0 - beta2 ** state.t)
    step = lr * sqrt_c2 / c1
    shifted_eps = eps * sqrt_c2
    for p, g, m, v, s in zip(arrays, grads, state.m, state.v, state.scratch):
        m *= beta1
        np.multiply(g, 1.0 - beta1, out=s)
        m += s
        v *= beta2
        np.multiply(g, g, out=s)
        s *= 1.0 - beta2
        v += s
        np.sqrt(v, out=s)
        s += shifted_eps
        np.divide(m, s, out=s)
        s *= step
        p -= s


def flatten(params: Params) -> list[np.ndarray]:
    return [a for pair in params for a in pair]


def adam_init(params: Params) -> AdamState:
    return adam_init_arrays(flatten(params))


def adam_step(
    params: Params, grads: Params, state: AdamState, lr: float, **kw
) -> tuple[Params, AdamState]:
    adam_step_arrays(flatten(params), flatten(grads), state, lr, **kw)
    return params, state


def soft_update(target: Params, online: Params, tau: float) -> Params:
    """Polyak averaging in place: target <- (1 - tau) * target + tau * online."""
    for (wt, bt), (wo, bo) in zip(target, online):
        if wt.shape != wo.shape or bt.shape != bo.shape:
            raise ValueError(
                f"shape mismatch: target {wt.shape}/{bt.shape} vs online {wo.shape}/{bo.shape}"
            )
        wt *= 1.0 - tau
        wt += tau * wo
        bt *= 1.0 - tau
        bt += tau * bo
    return target


def clone_params(params: Params) -> Params:
    return [(w.copy(), b.copy()) for w, b in params]


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Transition:
    obs: np.ndarray
    action: np.ndarray | int
    reward: float
    next_obs: np.ndarray
    done: bool


class ReplayBuffer:
    """Fixed-capacity FIFO ring with uniform with-replacement sampling."""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int = 1, discrete: bool = False):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        if discrete:
            self.act = np.zeros(capacity, dtype=np.int64)
        else:
            self.act = np.zeros((capacity, act_dim))
        self.rew = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(self, t: Transition) -> None:
        i = self._next
        self.obs[i] = t.obs
        self.act[i] = t.action
        self.rew[i] = t.reward
        self.next_obs[i] = t.next_obs
        self.done[i] = float(t.done)
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, n: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
        if self._size < n:
            raise RuntimeError(f"buffer holds {self._size} transitions, need {n}")
        idx = rng.integers(0, self._size, size=n)
        return {
            "obs": self.obs[idx],
            "act": self.act[idx],
            "rew": self.rew[idx],
            "next_obs": self.next_obs[idx],
            "done": self.done[idx],
        }


# ---------------------------------------------------------------------------
# Checkpoint format: one JSON document per network
# ---------------------------------------------------------------------------


def save_net(path: str | Path, params: Params, meta: dict | None = None) -> None:
    doc = {
        "spec": layer_sizes(params),
        "layers": [{"w": w.tolist(), "b": b.tolist()} for w, b in params],
        "meta": meta or {},
    }
    Path(path).write_text(json.dumps(doc))


def load_net(path: str | Path) -> tuple[Params, dict]:
    doc = json.loads(Path(path).read_text())
    sizes = doc.get("spec")
    layers = doc.get("layers")
    if not isinstance(sizes, list) or not isinstance(layers, list):
        raise ValueError(f"{path}: missing 'spec' or 'layers'")
    NetSpec(tuple(sizes))
    if len(layers) != len(sizes) - 1:
        raise ValueError(f"{path}: {len(layers)} layers for spec {sizes}")
    params: Params = []
    for i, layer in enumerate(layers):
        fan_in, fan_out = sizes[i], sizes[i + 1]
        w = np.asarray(layer["w"], dtype=np.float64)
        b = np.asarray(layer["b"], dtype=np.float64)
        if w.shape != (fan_out, fan_in):
            raise ValueError(
                f"{path}: layer {i} weight shape {w.shape} != {(fan_out, fan_in)}"
            )
        if b.shape != (fan_out,):
            raise ValueError(
                f"{path}: layer {i} bias shape {b.shape} != {(fan_out,)}"
            )
        params.append((w, b))
    return params, doc.get("meta", {})
