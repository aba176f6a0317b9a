"""Load and validate the evaluator's CSV outputs."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pandas as pd

RESULTS_COLUMNS = [
    "table", "adversary", "agent", "vol_train", "vol_test",
    "wealth_mean", "wealth_std", "sharpe", "inv_mean", "inv_std",
    "q_none", "q_both", "q_ask", "q_bid", "runs", "episodes", "seed",
]

DUMP_COLUMNS = ["seed", "terminal_wealth", "terminal_inventory",
                "n_none", "n_both", "n_ask", "n_bid"]

QUOTING_COLUMNS = ["q_none", "q_both", "q_ask", "q_bid"]

TABLE_IDS = ("rn", "eta0.01", "eta0.1", "eta0.5", "eta1", "zeta0.01", "zeta0.001")


@dataclass
class ResultsFrame:
    """Evaluation rows plus, optionally, the per-episode dump they came from."""

    results: pd.DataFrame
    episodes: pd.DataFrame | None = None


def load_results(path: str | Path) -> pd.DataFrame:
    df = pd.read_csv(path)
    missing = [c for c in RESULTS_COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"{path}: missing column(s) {missing}")
    if len(df) == 0:
        raise ValueError(f"{path}: no rows")
    qsum = df[QUOTING_COLUMNS].sum(axis=1)
    bad = df.index[(qsum - 100.0).abs() > 0.5]
    if len(bad):
        raise ValueError(
            f"{path}: quoting columns do not sum to ~100 on row(s) {list(bad)}"
        )
    return df


def load_dump(path: str | Path) -> pd.DataFrame:
    df = pd.read_csv(path)
    missing = [c for c in DUMP_COLUMNS if c not in df.columns]
    if missing:
        raise ValueError(f"{path}: missing column(s) {missing}")
    if len(df) == 0:
        raise ValueError(f"{path}: no episodes")
    return df
