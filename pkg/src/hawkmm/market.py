"""Mid-price dynamics, quote construction, and cash/inventory accounting.

The mid-price follows an arithmetic Brownian motion with drift; quotes are
symmetric-or-not offsets around it, and the account tracks cash plus a signed
integer inventory. Everything here is a pure function over small value types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class InvariantViolation(RuntimeError):
    """An internal invariant was broken; signals a bug in the caller."""


@dataclass(frozen=True)
class MarketParams:
    """Static configuration of one simulated market.

    ``h_min``/``h_max`` bound the signed inventory; they must straddle zero so
    a flat book is always admissible.
    """

    z0: float = 100.0
    sigma: float = 2.0
    dt: float = 0.005
    n_steps: int = 200
    h_min: int = -10
    h_max: int = 10

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not self.h_min < 0 < self.h_max:
            raise ValueError(
                f"inventory bounds must straddle 0, got [{self.h_min}, {self.h_max}]"
            )


@dataclass(frozen=True)
class Account:
    """Cash plus signed inventory, in asset units."""

    cash: float = 0.0
    inventory: int = 0


@dataclass(frozen=True)
class Fills:
    """Which side traded this step (at most one unit per side)."""

    bid_filled: bool = False
    ask_filled: bool = False


def step_price(z: float, b: float, sigma: float, dt: float, w: float) -> float:
    """Advance the mid-price one step: z + b*dt + sigma*sqrt(dt)*w, w ~ N(0,1).

    No clamping: the arithmetic model admits negative prices at high sigma.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return z + b * dt + sigma * math.sqrt(dt) * w


def quote_prices(z: float, delta_bid: float, delta_ask: float) -> tuple[float, float]:
    """Bid/ask prices from offsets: (z - delta_bid, z + delta_ask)."""
    if delta_bid < 0 or delta_ask < 0:
        raise ValueError(
            f"quote offsets must be >= 0, got bid={delta_bid}, ask={delta_ask}"
        )
    return z - delta_bid, z + delta_ask


def apply_fills(
    account: Account,
    fills: Fills,
    z: float,
    delta_bid: float,
    delta_ask: float,
    *,
    h_min: int | None = None,
    h_max: int | None = None,
) -> Account:
    """Settle this step's fills at the current mid-price.

    A bid fill buys one unit at z - delta_bid; an ask fill sells one unit at
    z + delta_ask. Inventory bounds, when given, are asserted (violations mean
    the caller failed to block a side upstream).
    """
    cash = account.cash
    inventory = account.inventory
    if fills.bid_filled:
        cash -= z - delta_bid
        inventory += 1
    if fills.ask_filled:
        cash += z + delta_ask
        inventory -= 1
    if h_min is not None and inventory < h_min:
        raise InvariantViolation(f"inventory {inventory} below bound {h_min}")
    if h_max is not None and inventory > h_max:
        raise InvariantViolation(f"inventory {inventory} above bound {h_max}")
    return Account(cash=cash, inventory=inventory)


def wealth(account: Account, z: float) -> float:
    """Mark-to-market wealth: cash + inventory * z."""
    return account.cash + account.inventory * z
