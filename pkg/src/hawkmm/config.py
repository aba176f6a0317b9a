"""Pipeline configuration: dataclasses mirrored one-to-one by the JSON config file.

Unknown keys anywhere in the document are errors; silent typos in experiment
configs are how results tables go wrong.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .env import RiskParams
from .hawkes import HawkesParams
from .market import MarketParams

ADVERSARY_KINDS = ("fixed", "random", "all", "a", "b", "k")
STRATEGIC_KINDS = ("all", "a", "b", "k")
MM_KINDS = ("always", "two_action", "four_action")


@dataclass(frozen=True)
class TrainSchedule:
    """Episode count and update cadence for one learner.

    Every ``update_period`` environment steps the agent performs a burst of
    ``update_period`` gradient updates (a 1:1 replay ratio), so SAC's default
    updates in bursts of 1000 while DQN's updates every step.
    """

    episodes: int
    update_period: int
    lr: float
    batch: int
    warmup_steps: int = 1000

    def __post_init__(self) -> None:
        if self.episodes < 1 or self.update_period < 1 or self.batch < 1:
            raise ValueError(f"bad schedule {self}")
        if self.lr <= 0:
            raise ValueError(f"learning rate must be positive, got {self.lr}")


SAC_SCHEDULE = TrainSchedule(episodes=50_000, update_period=1000, lr=3e-4, batch=64)
DQN_SCHEDULE = TrainSchedule(episodes=50_000, update_period=1, lr=1e-4, batch=64)


@dataclass(frozen=True)
class PipelineConfig:
    market: MarketParams = field(default_factory=MarketParams)
    hawkes: HawkesParams = field(default_factory=HawkesParams)
    risk: RiskParams = field(default_factory=RiskParams)
    adversary: str = "fixed"
    train_vol: float = 2.0
    test_vol: float = 2.0
    sac: TrainSchedule = SAC_SCHEDULE
    dqn: TrainSchedule = DQN_SCHEDULE
    hidden: tuple[int, ...] = (64, 64)
    gamma: float = 0.99
    tau: float = 0.005
    # the discrete agents use a shorter horizon: with gamma near 1 the
    # bootstrapped targets accumulate ~1/(1-gamma^2) times the per-step
    # inventory noise, drowning the small per-action value gaps at desk scale
    dqn_gamma: float = 0.9
    dqn_target_period: int = 500
    buffer_capacity: int = 100_000
    scale: float = 1.0
    seed: int = 0
    out_dir: str = "runs"

    def __post_init__(self) -> None:
        if self.adversary not in ADVERSARY_KINDS:
            raise ValueError(
                f"adversary must be one of {ADVERSARY_KINDS}, got {self.adversary!r}"
            )
        if self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if not 0 <= self.gamma <= 1 or not 0 < self.tau <= 1:
            raise ValueError(f"bad gamma/tau: {self.gamma}, {self.tau}")

    @property
    def strategic(self) -> bool:
        return self.adversary in STRATEGIC_KINDS

    def scaled_episodes(self, schedule: TrainSchedule) -> int:
        return max(1, round(schedule.episodes * self.scale))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["hidden"] = list(self.hidden)
        return d

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()
        ).hexdigest()[:16]


def _build(cls, data: dict, where: str):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(fields)
    if unknown:
        raise ValueError(f"unknown key(s) {sorted(unknown)} in {where}")
    return data


def config_from_dict(data: dict) -> PipelineConfig:
    """Strict construction: any unrecognized key fails fast."""
    data = dict(_build(PipelineConfig, data, "config"))
    for key, cls in (
        ("market", MarketParams),
        ("hawkes", HawkesParams),
        ("risk", RiskParams),
        ("sac", TrainSchedule),
        ("dqn", TrainSchedule),
    ):
        if key in data:
            data[key] = cls(**_build(cls, data[key], f"config.{key}"))
    if "hidden" in data:
        data["hidden"] = tuple(data["hidden"])
    return PipelineConfig(**data)


def load_config(path: str | Path) -> PipelineConfig:
    return config_from_dict(json.loads(Path(path).read_text()))
