"""Self-exciting trade-arrival intensities and fill sampling.

Each book side carries its own intensity. Per step the intensity mean-reverts
toward a baseline and jumps by a fixed amount after that side trades:

    lam' = lam + mrs * (baseline - lam) * dt + jump * [matched]

The effective arrival rate decays exponentially with the quote offset, and a
fill occurs within one step with probability 1 - exp(-lam_eff * dt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class HawkesParams:
    mean_reversion_speed: float = 60.0
    baseline_rate: float = 10.0
    jump_size: float = 40.0
    dt: float = 0.005

    def __post_init__(self) -> None:
        for name in ("mean_reversion_speed", "baseline_rate", "jump_size", "dt"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        # explicit Euler update is only contractive for mrs*dt < 1
        if self.mean_reversion_speed * self.dt >= 1:
            raise ValueError(
                "mean_reversion_speed * dt must be < 1, got "
                f"{self.mean_reversion_speed * self.dt}"
            )


@dataclass
class HawkesState:
    """Per-side intensities plus last step's fill outcomes."""

    intensity_bid: float
    intensity_ask: float
    last_fill_bid: bool = False
    last_fill_ask: bool = False

    @classmethod
    def at_baseline(cls, params: HawkesParams) -> "HawkesState":
        return cls(intensity_bid=params.baseline_rate, intensity_ask=params.baseline_rate)


def update_intensity(
    lam: float,
    params: HawkesParams,
    matched: bool,
    baseline_rate: float | None = None,
) -> float:
    """One explicit-Euler intensity update; ``baseline_rate`` overrides the
    configured baseline (the adversary controls it at run time)."""
    baseline = params.baseline_rate if baseline_rate is None else baseline_rate
    lam_next = lam + params.mean_reversion_speed * (baseline - lam) * params.dt
    if matched:
        lam_next += params.jump_size
    return lam_next


def arrival_intensity(lam: float, k: float, delta: float) -> float:
    """Effective arrival rate lam * exp(-k * delta) for a quote at offset delta."""
    return lam * math.exp(-k * delta)


def fill_probability(effective_lam: float, dt: float) -> float:
    """Probability of at least one arrival within dt: 1 - exp(-lam * dt).

    Bounded in [0, 1) for any finite intensity, unlike a raw lam*dt thinning.
    """
    if effective_lam < 0:
        raise ValueError(f"intensity must be >= 0, got {effective_lam}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    p = -math.expm1(-effective_lam * dt)
    # for lam*dt >~ 37 the result rounds to 1.0; keep the open interval honest
    return p if p < 1.0 else math.nextafter(1.0, 0.0)


def sample_fill(p: float, u: float) -> bool:
    """Deterministic Bernoulli: fill iff the uniform draw lands below p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    return u < p
