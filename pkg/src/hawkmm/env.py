"""Episodic market-making environment with an adversary-controlled market.

One step runs, in order: effective arrival intensities from the current
Hawkes intensities and quote offsets, fill sampling (sides that are not
quoted, or whose fill would breach an inventory bound, cannot trade), cash
settlement at the current mid, the price move, the intensity updates (with
the adversary's baseline), and finally the risk-penalized reward

    R = dWealth - zeta * H^2 - [terminal] * eta * H^2

with the adversary earning exactly -R (zero-sum).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .hawkes import HawkesParams, HawkesState, arrival_intensity, fill_probability, sample_fill, update_intensity
from .market import Account, Fills, MarketParams, apply_fills, step_price, wealth

DRIFT_RANGE = (-5.0, 5.0)
BASELINE_RANGE = (7.5, 12.5)
DECAY_RANGE = (1.125, 1.875)
OFFSET_RANGE = (0.0, 3.0)

OBS_DIM = 5


@dataclass(frozen=True)
class AdversaryParams:
    """The adversary's control vector: drift, Hawkes baseline, book decay."""

    b: float = 0.0
    a: float = 10.0
    k: float = 1.5

    def __post_init__(self) -> None:
        if not DRIFT_RANGE[0] <= self.b <= DRIFT_RANGE[1]:
            raise ValueError(f"drift b={self.b} outside {DRIFT_RANGE}")
        if not BASELINE_RANGE[0] <= self.a <= BASELINE_RANGE[1]:
            raise ValueError(f"baseline a={self.a} outside {BASELINE_RANGE}")
        if not DECAY_RANGE[0] <= self.k <= DECAY_RANGE[1]:
            raise ValueError(f"decay k={self.k} outside {DECAY_RANGE}")


FIXED_ADVERSARY = AdversaryParams(b=0.0, a=10.0, k=1.5)


@dataclass(frozen=True)
class RiskParams:
    """Inventory penalty coefficients: eta at the terminal step, zeta each step."""

    eta: float = 0.0
    zeta: float = 0.0

    def __post_init__(self) -> None:
        if self.eta < 0 or self.zeta < 0:
            raise ValueError(f"risk coefficients must be >= 0, got {self}")


RISK_NEUTRAL = RiskParams(0.0, 0.0)

# the studied coefficient pairs, keyed by results-table id
RISK_TABLES = {
    "rn": RiskParams(0.0, 0.0),
    "eta0.01": RiskParams(0.01, 0.0),
    "eta0.1": RiskParams(0.1, 0.0),
    "eta0.5": RiskParams(0.5, 0.0),
    "eta1": RiskParams(1.0, 0.0),
    "zeta0.01": RiskParams(0.0, 0.01),
    "zeta0.001": RiskParams(0.0, 0.001),
}


class QuoteMode(enum.IntEnum):
    """Four-action encoding: 0 no quote, 1 both sides, 2 ask only, 3 bid only."""

    NONE = 0
    BOTH = 1
    ASK_ONLY = 2
    BID_ONLY = 3

    @property
    def quotes_bid(self) -> bool:
        return self in (QuoteMode.BOTH, QuoteMode.BID_ONLY)

    @property
    def quotes_ask(self) -> bool:
        return self in (QuoteMode.BOTH, QuoteMode.ASK_ONLY)


@dataclass(frozen=True)
class QuoteAction:
    """Market-maker decision: quoting mode plus offsets (ignored on un-quoted sides)."""

    mode: QuoteMode = QuoteMode.BOTH
    delta_bid: float = 0.0
    delta_ask: float = 0.0

    def __post_init__(self) -> None:
        lo, hi = OFFSET_RANGE
        if not (lo <= self.delta_bid <= hi and lo <= self.delta_ask <= hi):
            raise ValueError(
                f"offsets must lie in {OFFSET_RANGE}, got "
                f"({self.delta_bid}, {self.delta_ask})"
            )


NO_QUOTE = QuoteAction(mode=QuoteMode.NONE)


@dataclass(frozen=True)
class MarketState:
    """Full episode state after ``step_index`` completed steps."""

    step_index: int
    z: float
    z_prev: float
    account: Account
    hawkes: HawkesState


def reward(delta_wealth: float, inventory: int, risk: RiskParams, terminal: bool) -> float:
    """Risk-penalized per-step reward."""
    r = delta_wealth - risk.zeta * inventory * inventory
    if terminal:
        r -= risk.eta * inventory * inventory
    return r


def observe(state: MarketState, market: MarketParams, hawkes: HawkesParams) -> np.ndarray:
    """Five O(1)-scaled features: time fraction, relative inventory, normalized
    last price change, and the two intensities over the configured baseline."""
    dz_scale = market.sigma * math.sqrt(market.dt) if market.sigma > 0 else 1.0
    return np.array(
        [
            state.step_index / market.n_steps,
            state.account.inventory / market.h_max,
            (state.z - state.z_prev) / dz_scale,
            state.hawkes.intensity_bid / hawkes.baseline_rate,
            state.hawkes.intensity_ask / hawkes.baseline_rate,
        ]
    )


def decode_mm_action(
    kind: str,
    raw,
    frozen_quoter: Callable[[np.ndarray], tuple[float, float]] | None = None,
    obs: np.ndarray | None = None,
) -> QuoteAction:
    """Turn a policy's raw output into a QuoteAction.

    ``always`` takes a pair of offsets directly. The discrete kinds map an
    index to a quoting mode and, whenever any side is quoted, pull the offsets
    from the frozen always-quote policy evaluated on ``obs``.
    """
    if kind == "always":
        delta_bid, delta_ask = float(raw[0]), float(raw[1])
        return QuoteAction(QuoteMode.BOTH, delta_bid, delta_ask)
    if kind == "two_action":
        index = int(raw)
        if index not in (0, 1):
            raise ValueError(f"two-action index must be 0 or 1, got {index}")
        mode = QuoteMode.NONE if index == 0 else QuoteMode.BOTH
    elif kind == "four_action":
        index = int(raw)
        if index not in (0, 1, 2, 3):
            raise ValueError(f"four-action index must be in 0..3, got {index}")
        mode = QuoteMode(index)
    else:
        raise ValueError(f"unknown agent kind {kind!r}")
    if mode is QuoteMode.NONE:
        return NO_QUOTE
    if frozen_quoter is None:
        raise ValueError(f"{kind} decoding needs a frozen quoter for offsets")
    delta_bid, delta_ask = frozen_quoter(obs)
    return QuoteAction(mode, float(delta_bid), float(delta_ask))


class MarketMakingEnv:
    """Stateful episode driver; one instance per logical thread.

    Randomness is drawn up-front at reset (two uniforms and one normal per
    step), so identical seeds give bit-identical trajectories under identical
    action streams, and trajectories stay aligned across counterfactual action
    streams.
    """

    def __init__(
        self,
        market: MarketParams | None = None,
        hawkes: HawkesParams | None = None,
        risk: RiskParams = RISK_NEUTRAL,
    ):
        self.market = market if market is not None else MarketParams()
        self.hawkes_params = hawkes if hawkes is not None else HawkesParams(dt=self.market.dt)
        self.risk = risk
        if self.hawkes_params.dt != self.market.dt:
            raise ValueError(
                f"market dt {self.market.dt} != hawkes dt {self.hawkes_params.dt}"
            )
        self.state: MarketState | None = None
        self._u_bid = self._u_ask = self._w = None

    def reset(self, seed) -> np.ndarray:
        """Start a fresh episode; ``seed`` is anything numpy's default_rng accepts."""
        rng = np.random.default_rng(seed)
        n = self.market.n_steps
        self._u_bid = rng.random(n)
        self._u_ask = rng.random(n)
        self._w = rng.standard_normal(n)
        self.state = MarketState(
            step_index=0,
            z=self.market.z0,
            z_prev=self.market.z0,
            account=Account(),
            hawkes=HawkesState.at_baseline(self.hawkes_params),
        )
        return observe(self.state, self.market, self.hawkes_params)

    @property
    def done(self) -> bool:
        return self.state is not None and self.state.step_index >= self.market.n_steps

    def step(
        self, mm: QuoteAction, adv: AdversaryParams
    ) -> tuple[np.ndarray, float, float, bool, dict]:
        """Advance one step; returns (obs, reward_mm, reward_adv, done, info)."""
        state = self.state
        if state is None:
            raise RuntimeError("reset() must be called before step()")
        n = state.step_index
        market = self.market
        if n >= market.n_steps:
            raise RuntimeError("episode is done; call reset()")
        hp = self.hawkes_params
        account = state.account

        # a side trades only if quoted and the fill would not breach a bound
        quote_bid = mm.mode.quotes_bid and account.inventory < market.h_max
        quote_ask = mm.mode.quotes_ask and account.inventory > market.h_min

        p_bid = p_ask = 0.0
        if quote_bid:
            eff = arrival_intensity(state.hawkes.intensity_bid, adv.k, mm.delta_bid)
            p_bid = fill_probability(eff, market.dt)
        if quote_ask:
            eff = arrival_intensity(state.hawkes.intensity_ask, adv.k, mm.delta_ask)
            p_ask = fill_probability(eff, market.dt)
        fills = Fills(
            bid_filled=sample_fill(p_bid, self._u_bid[n]),
            ask_filled=sample_fill(p_ask, self._u_ask[n]),
        )

        new_account = apply_fills(
            account, fills, state.z, mm.delta_bid, mm.delta_ask,
            h_min=market.h_min, h_max=market.h_max,
        )
        z_next = step_price(state.z, adv.b, market.sigma, market.dt, self._w[n])
        new_hawkes = HawkesState(
            intensity_bid=update_intensity(
                state.hawkes.intensity_bid, hp, fills.bid_filled, baseline_rate=adv.a
            ),
            intensity_ask=update_intensity(
                state.hawkes.intensity_ask, hp, fills.ask_filled, baseline_rate=adv.a
            ),
            last_fill_bid=fills.bid_filled,
            last_fill_ask=fills.ask_filled,
        )

        delta_wealth = wealth(new_account, z_next) - wealth(account, state.z)
        done = n + 1 >= market.n_steps
        r_mm = reward(delta_wealth, new_account.inventory, self.risk, terminal=done)

        self.state = MarketState(
            step_index=n + 1,
            z=z_next,
            z_prev=state.z,
            account=new_account,
            hawkes=new_hawkes,
        )
        obs = observe(self.state, market, hp)
        info = {
            "fills": fills,
            "delta_wealth": delta_wealth,
            "dz": z_next - state.z,
            "p_bid": p_bid,
            "p_ask": p_ask,
        }
        return obs, r_mm, -r_mm, done, info
