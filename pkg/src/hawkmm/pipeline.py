"""Training stages and checkpoint persistence.

The pipeline trains one side at a time: first the adversary (for strategic
kinds) against a fixed always-quoting opponent, then the always-quote market
maker against the frozen adversary, then the discrete-action market makers,
which delegate their prices to the frozen always-quote policy.

Checkpoints are directories holding one JSON file per network plus a
``manifest.json`` naming them, the action space, and provenance metadata.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import replace
from pathlib import Path
from typing import Callable

import numpy as np

from .config import MM_KINDS, STRATEGIC_KINDS, PipelineConfig, TrainSchedule
from .dqn import DqnAgent, linear_epsilon
from .env import (
    BASELINE_RANGE,
    DECAY_RANGE,
    DRIFT_RANGE,
    FIXED_ADVERSARY,
    OFFSET_RANGE,
    AdversaryParams,
    MarketMakingEnv,
    OBS_DIM,
    QuoteAction,
    QuoteMode,
    decode_mm_action,
)
from .nn import Transition, load_net, save_net
from .sac import Box, SacAgent, sac_act

MM_BOX = Box(
    np.array([OFFSET_RANGE[0], OFFSET_RANGE[0]]),
    np.array([OFFSET_RANGE[1], OFFSET_RANGE[1]]),
)

ADVERSARY_BOXES = {
    "all": Box(
        np.array([DRIFT_RANGE[0], BASELINE_RANGE[0], DECAY_RANGE[0]]),
        np.array([DRIFT_RANGE[1], BASELINE_RANGE[1], DECAY_RANGE[1]]),
    ),
    "a": Box(np.array([BASELINE_RANGE[0]]), np.array([BASELINE_RANGE[1]])),
    "b": Box(np.array([DRIFT_RANGE[0]]), np.array([DRIFT_RANGE[1]])),
    "k": Box(np.array([DECAY_RANGE[0]]), np.array([DECAY_RANGE[1]])),
}

# seed-stream component per training stage, so stages never share randomness
STAGE_IDS = {"adversary": 0, "always": 1, "two_action": 2, "four_action": 3}

# the opponent the adversary trains against: a plain always-quoting maker
# with symmetric unit offsets (the paper-gap default)
ADVERSARY_OPPONENT = QuoteAction(QuoteMode.BOTH, 1.0, 1.0)


def adversary_params_from_action(kind: str, action: np.ndarray) -> AdversaryParams:
    """Map a policy action onto the adversary's controls; single-parameter
    kinds hold the other coordinates at the fixed-adversary values."""
    if kind == "all":
        return AdversaryParams(b=action[0], a=action[1], k=action[2])
    if kind == "a":
        return AdversaryParams(b=0.0, a=action[0], k=1.5)
    if kind == "b":
        return AdversaryParams(b=action[0], a=10.0, k=1.5)
    if kind == "k":
        return AdversaryParams(b=0.0, a=10.0, k=action[0])
    raise ValueError(f"not a strategic kind: {kind!r}")


def sample_adversary(
    kind: str,
    rng: np.random.Generator | None = None,
    policy: SacAgent | None = None,
    obs: np.ndarray | None = None,
) -> AdversaryParams:
    """One adversary decision: constant, a fresh uniform draw, or the policy's
    deterministic action mapped onto the parameter boxes."""
    if kind == "fixed":
        return FIXED_ADVERSARY
    if kind == "random":
        if rng is None:
            raise ValueError("random adversary needs an rng")
        return AdversaryParams(
            b=rng.uniform(*DRIFT_RANGE),
            a=rng.uniform(*BASELINE_RANGE),
            k=rng.uniform(*DECAY_RANGE),
        )
    if kind in STRATEGIC_KINDS:
        if policy is None:
            raise ValueError(f"strategic adversary {kind!r} needs a policy")
        action = policy.act(obs, deterministic=True)
        return adversary_params_from_action(kind, action)
    raise ValueError(f"unknown adversary kind {kind!r}")


class Adversary:
    """Episode-scoped adversary behavior for training and evaluation.

    Fixed and random kinds decide once per episode (at ``begin_episode``);
    strategic kinds consult their frozen policy every step.
    """

    def __init__(self, kind: str, policy: SacAgent | None = None):
        if kind in STRATEGIC_KINDS and policy is None:
            raise ValueError(f"strategic adversary {kind!r} needs a policy")
        self.kind = kind
        self.policy = policy
        self._episode_params = FIXED_ADVERSARY

    def begin_episode(self, rng: np.random.Generator | None = None) -> None:
        if self.kind == "random":
            self._episode_params = sample_adversary("random", rng)

    def params(self, obs: np.ndarray) -> AdversaryParams:
        if self.kind in STRATEGIC_KINDS:
            return sample_adversary(self.kind, policy=self.policy, obs=obs)
        return self._episode_params


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def _write_manifest(out_dir: Path, manifest: dict) -> Path:
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2))
    return path


def save_sac_checkpoint(out_dir: str | Path, agent: SacAgent, meta: dict) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    nets = {
        "actor": agent.actor,
        "q1": agent.q1,
        "q2": agent.q2,
        "q1_target": agent.q1_targ,
        "q2_target": agent.q2_targ,
    }
    net_meta = {k: meta.get(k) for k in ("seed", "created_by", "agent_kind")}
    for name, params in nets.items():
        save_net(out_dir / f"{name}.json", params, meta=net_meta)
    manifest = {
        "agent": "sac",
        "obs_dim": agent.obs_dim,
        "hidden": list(agent.hidden),
        "box_low": agent.box.low.tolist(),
        "box_high": agent.box.high.tolist(),
        "log_alpha": float(agent.log_alpha[0]),
        "networks": {name: f"{name}.json" for name in nets},
        "meta": meta,
    }
    return _write_manifest(out_dir, manifest)


def save_dqn_checkpoint(
    out_dir: str | Path, agent: DqnAgent, quoter: SacAgent, meta: dict
) -> Path:
    """The frozen quoter's actor is copied in, so the checkpoint is self-contained."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    net_meta = {k: meta.get(k) for k in ("seed", "created_by", "agent_kind")}
    save_net(out_dir / "q.json", agent.q, meta=net_meta)
    save_net(out_dir / "q_target.json", agent.q_target, meta=net_meta)
    save_net(out_dir / "quoter_actor.json", quoter.actor, meta=net_meta)
    manifest = {
        "agent": "dqn",
        "obs_dim": agent.obs_dim,
        "hidden": list(agent.hidden),
        "n_actions": agent.n_actions,
        "networks": {"q": "q.json", "q_target": "q_target.json"},
        "quoter": {
            "actor": "quoter_actor.json",
            "box_low": quoter.box.low.tolist(),
            "box_high": quoter.box.high.tolist(),
        },
        "meta": meta,
    }
    return _write_manifest(out_dir, manifest)


def _check_hash(manifest: dict, expect_config_hash: str | None, path: Path) -> None:
    if expect_config_hash is None:
        return
    got = manifest.get("meta", {}).get("config_hash")
    if got != expect_config_hash:
        warnings.warn(
            f"{path}: checkpoint config hash {got} != expected {expect_config_hash}"
        )


def load_manifest(manifest_path: str | Path) -> dict:
    path = Path(manifest_path)
    if path.is_dir():
        path = path / "manifest.json"
    manifest = json.loads(path.read_text())
    if manifest.get("agent") not in ("sac", "dqn"):
        raise ValueError(f"{path}: unknown agent kind {manifest.get('agent')!r}")
    manifest["_dir"] = path.parent
    return manifest


def load_sac_checkpoint(
    manifest_path: str | Path, expect_config_hash: str | None = None
) -> SacAgent:
    manifest = load_manifest(manifest_path)
    if manifest["agent"] != "sac":
        raise ValueError(f"{manifest_path}: expected a sac checkpoint")
    _check_hash(manifest, expect_config_hash, Path(manifest_path))
    box = Box(np.array(manifest["box_low"]), np.array(manifest["box_high"]))
    agent = SacAgent(
        obs_dim=manifest["obs_dim"],
        box=box,
        hidden=tuple(manifest["hidden"]),
        seed=manifest["meta"].get("seed", 0),
    )
    base = manifest["_dir"]
    agent.load_params(
        actor=load_net(base / manifest["networks"]["actor"])[0],
        q1=load_net(base / manifest["networks"]["q1"])[0],
        q2=load_net(base / manifest["networks"]["q2"])[0],
        q1_targ=load_net(base / manifest["networks"]["q1_target"])[0],
        q2_targ=load_net(base / manifest["networks"]["q2_target"])[0],
        log_alpha=manifest["log_alpha"],
    )
    return agent


def load_dqn_checkpoint(
    manifest_path: str | Path, expect_config_hash: str | None = None
) -> tuple[DqnAgent, Callable[[np.ndarray], tuple[float, float]]]:
    """Returns the agent plus the embedded frozen quoter (obs -> offsets)."""
    manifest = load_manifest(manifest_path)
    if manifest["agent"] != "dqn":
        raise ValueError(f"{manifest_path}: expected a dqn checkpoint")
    _check_hash(manifest, expect_config_hash, Path(manifest_path))
    agent = DqnAgent(
        obs_dim=manifest["obs_dim"],
        n_actions=manifest["n_actions"],
        hidden=tuple(manifest["hidden"]),
        seed=manifest["meta"].get("seed", 0),
    )
    base = manifest["_dir"]
    agent.load_params(
        q=load_net(base / manifest["networks"]["q"])[0],
        q_target=load_net(base / manifest["networks"]["q_target"])[0],
    )
    quoter_params, _ = load_net(base / manifest["quoter"]["actor"])
    quoter_box = Box(
        np.array(manifest["quoter"]["box_low"]),
        np.array(manifest["quoter"]["box_high"]),
    )

    def quoter(obs: np.ndarray) -> tuple[float, float]:
        a = sac_act(quoter_params, obs, quoter_box, deterministic=True)
        return float(a[0]), float(a[1])

    return agent, quoter


def frozen_quoter_from_sac(agent: SacAgent) -> Callable[[np.ndarray], tuple[float, float]]:
    def quoter(obs: np.ndarray) -> tuple[float, float]:
        a = agent.act(obs, deterministic=True)
        return float(a[0]), float(a[1])

    return quoter


# ---------------------------------------------------------------------------
# Training stages
# ---------------------------------------------------------------------------


def _train_env(cfg: PipelineConfig) -> MarketMakingEnv:
    return MarketMakingEnv(
        replace(cfg.market, sigma=cfg.train_vol), cfg.hawkes, cfg.risk
    )


def _write_history(out_dir: Path, returns: list[float]) -> None:
    (out_dir / "history.json").write_text(json.dumps({"episode_returns": returns}))


def _meta(cfg: PipelineConfig, agent_kind: str, episodes: int, wall: float, **extra) -> dict:
    meta = {
        "seed": cfg.seed,
        "created_by": "hawkmm",
        "agent_kind": agent_kind,
        "adversary_kind": cfg.adversary,
        "train_vol": cfg.train_vol,
        "risk": {"eta": cfg.risk.eta, "zeta": cfg.risk.zeta},
        "config_hash": cfg.config_hash(),
        "episodes": episodes,
        "wall_time_s": round(wall, 3),
    }
    meta.update(extra)
    return meta


def _maybe_update(agent, schedule: TrainSchedule, total_steps: int) -> None:
    if (
        total_steps % schedule.update_period == 0
        and len(agent.buffer) >= max(schedule.batch, schedule.warmup_steps)
    ):
        for _ in range(schedule.update_period):
            agent.train_step()


def train_adversary(cfg: PipelineConfig, out_dir: str | Path | None = None) -> Path:
    """SAC training of a strategic adversary against the fixed always-quoting
    opponent; rewards are the negated market-maker rewards."""
    if not cfg.strategic:
        raise ValueError(f"adversary kind {cfg.adversary!r} is not trainable")
    out_dir = Path(out_dir) if out_dir else Path(cfg.out_dir) / "adversary"
    schedule = cfg.sac
    episodes = cfg.scaled_episodes(schedule)
    stage = STAGE_IDS["adversary"]
    box = ADVERSARY_BOXES[cfg.adversary]
    agent = SacAgent(
        OBS_DIM, box, hidden=cfg.hidden, lr=schedule.lr, gamma=cfg.gamma, tau=cfg.tau,
        buffer_capacity=cfg.buffer_capacity, batch_size=schedule.batch,
        seed=(cfg.seed, stage, 0),
    )
    env = _train_env(cfg)
    t0 = time.perf_counter()
    returns: list[float] = []
    total_steps = 0
    for ep in range(episodes):
        obs = env.reset(seed=(cfg.seed, stage, 1, ep))
        ep_return = 0.0
        done = False
        while not done:
            if total_steps < schedule.warmup_steps:
                action = agent.rng.uniform(box.low, box.high)
            else:
                action = agent.act(obs)
            adv = adversary_params_from_action(cfg.adversary, action)
            next_obs, _, r_adv, done, _ = env.step(ADVERSARY_OPPONENT, adv)
            agent.buffer.push(Transition(obs, action, r_adv, next_obs, done))
            obs = next_obs
            ep_return += r_adv
            total_steps += 1
            _maybe_update(agent, schedule, total_steps)
        returns.append(ep_return)
    wall = time.perf_counter() - t0
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_history(out_dir, returns)
    return save_sac_checkpoint(
        out_dir, agent, _meta(cfg, "adversary", episodes, wall)
    )


def train_always_mm(
    cfg: PipelineConfig,
    adversary_ckpt: str | Path | None = None,
    out_dir: str | Path | None = None,
) -> Path:
    """SAC training of the always-quoting maker (2-D offset box) against the
    configured adversary, frozen if strategic."""
    if cfg.strategic and adversary_ckpt is None:
        raise ValueError(f"adversary kind {cfg.adversary!r} needs a checkpoint")
    out_dir = Path(out_dir) if out_dir else Path(cfg.out_dir) / "always_mm"
    policy = load_sac_checkpoint(adversary_ckpt) if cfg.strategic else None
    adversary = Adversary(cfg.adversary, policy)
    schedule = cfg.sac
    episodes = cfg.scaled_episodes(schedule)
    stage = STAGE_IDS["always"]
    agent = SacAgent(
        OBS_DIM, MM_BOX, hidden=cfg.hidden, lr=schedule.lr, gamma=cfg.gamma,
        tau=cfg.tau, buffer_capacity=cfg.buffer_capacity, batch_size=schedule.batch,
        seed=(cfg.seed, stage, 0),
    )
    env = _train_env(cfg)
    t0 = time.perf_counter()
    returns: list[float] = []
    total_steps = 0
    for ep in range(episodes):
        obs = env.reset(seed=(cfg.seed, stage, 1, ep))
        adversary.begin_episode(np.random.default_rng((cfg.seed, stage, 2, ep)))
        ep_return = 0.0
        done = False
        while not done:
            if total_steps < schedule.warmup_steps:
                action = agent.rng.uniform(MM_BOX.low, MM_BOX.high)
            else:
                action = agent.act(obs)
            mm = QuoteAction(QuoteMode.BOTH, action[0], action[1])
            next_obs, r_mm, _, done, _ = env.step(mm, adversary.params(obs))
            agent.buffer.push(Transition(obs, action, r_mm, next_obs, done))
            obs = next_obs
            ep_return += r_mm
            total_steps += 1
            _maybe_update(agent, schedule, total_steps)
        returns.append(ep_return)
    wall = time.perf_counter() - t0
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_history(out_dir, returns)
    return save_sac_checkpoint(
        out_dir, agent, _meta(cfg, "always", episodes, wall)
    )


def train_multiaction_mm(
    cfg: PipelineConfig,
    adversary_ckpt: str | Path | None,
    always_ckpt: str | Path,
    kind: str,
    out_dir: str | Path | None = None,
) -> Path:
    """DQN training of a discrete quoting agent; prices for quoted sides come
    from the frozen always-quote policy."""
    if kind not in ("two_action", "four_action"):
        raise ValueError(f"kind must be two_action or four_action, got {kind!r}")
    if always_ckpt is None:
        raise ValueError("multi-action training needs the always-quote checkpoint")
    if cfg.strategic and adversary_ckpt is None:
        raise ValueError(f"adversary kind {cfg.adversary!r} needs a checkpoint")
    out_dir = Path(out_dir) if out_dir else Path(cfg.out_dir) / kind
    quoter_agent = load_sac_checkpoint(always_ckpt)
    quoter = frozen_quoter_from_sac(quoter_agent)
    policy = load_sac_checkpoint(adversary_ckpt) if cfg.strategic else None
    adversary = Adversary(cfg.adversary, policy)
    schedule = cfg.dqn
    episodes = cfg.scaled_episodes(schedule)
    horizon = episodes * cfg.market.n_steps
    stage = STAGE_IDS[kind]
    n_actions = 2 if kind == "two_action" else 4
    agent = DqnAgent(
        OBS_DIM, n_actions, hidden=cfg.hidden, lr=schedule.lr, gamma=cfg.dqn_gamma,
        target_period=cfg.dqn_target_period,
        buffer_capacity=cfg.buffer_capacity, batch_size=schedule.batch,
        seed=(cfg.seed, stage, 0),
    )
    env = _train_env(cfg)
    t0 = time.perf_counter()
    returns: list[float] = []
    total_steps = 0
    for ep in range(episodes):
        obs = env.reset(seed=(cfg.seed, stage, 1, ep))
        adversary.begin_episode(np.random.default_rng((cfg.seed, stage, 2, ep)))
        ep_return = 0.0
        done = False
        while not done:
            eps = linear_epsilon(total_steps, horizon)
            index = agent.act(obs, epsilon=eps)
            mm = decode_mm_action(kind, index, quoter, obs)
            next_obs, r_mm, _, done, _ = env.step(mm, adversary.params(obs))
            agent.buffer.push(Transition(obs, index, r_mm, next_obs, done))
            obs = next_obs
            ep_return += r_mm
            total_steps += 1
            _maybe_update(agent, schedule, total_steps)
        returns.append(ep_return)
    wall = time.perf_counter() - t0
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_history(out_dir, returns)
    return save_dqn_checkpoint(
        out_dir, agent, quoter_agent, _meta(cfg, kind, episodes, wall)
    )


# ---------------------------------------------------------------------------
# Evaluation-facing policy wrappers
# ---------------------------------------------------------------------------


def load_mm_policy(manifest_path: str | Path) -> Callable[[np.ndarray], QuoteAction]:
    """Deterministic evaluation policy (obs -> QuoteAction) from a checkpoint."""
    manifest = load_manifest(manifest_path)
    if manifest["agent"] == "sac":
        agent = load_sac_checkpoint(manifest_path)

        def policy(obs: np.ndarray) -> QuoteAction:
            a = agent.act(obs, deterministic=True)
            return decode_mm_action("always", a)

        return policy
    agent, quoter = load_dqn_checkpoint(manifest_path)
    kind = "two_action" if agent.n_actions == 2 else "four_action"

    def policy(obs: np.ndarray) -> QuoteAction:
        return decode_mm_action(kind, agent.act(obs, epsilon=0.0), quoter, obs)

    return policy
