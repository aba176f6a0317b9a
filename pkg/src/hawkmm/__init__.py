"""Adversarial market making on a Hawkes-driven execution market.

Library layout:

- ``market``: mid-price process, quote construction, cash/inventory accounting
- ``hawkes``: self-exciting arrival intensities and fill sampling
- ``env``: the episodic zero-sum environment and action decoding
- ``nn``: MLP with exact gradients, Adam, replay buffer, JSON checkpoints
- ``sac`` / ``dqn``: the two learners, built on ``nn``
- ``pipeline``: adversary kinds, training stages, checkpoint manifests
- ``evaluation``: batch evaluation protocol and results CSV
- ``cli``: command-line entry points (``hawkmm --help``)
"""

from .env import (
    AdversaryParams,
    FIXED_ADVERSARY,
    MarketMakingEnv,
    QuoteAction,
    QuoteMode,
    RiskParams,
    RISK_TABLES,
)
from .hawkes import HawkesParams, HawkesState
from .market import Account, Fills, MarketParams

__all__ = [
    "Account",
    "AdversaryParams",
    "FIXED_ADVERSARY",
    "Fills",
    "HawkesParams",
    "HawkesState",
    "MarketMakingEnv",
    "MarketParams",
    "QuoteAction",
    "QuoteMode",
    "RiskParams",
    "RISK_TABLES",
]

__version__ = "0.1.0"
