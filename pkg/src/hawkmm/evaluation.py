"""Batch evaluation of frozen policies and the results CSV.

The protocol evaluates a policy over ``runs`` x ``episodes`` episodes in the
fixed-adversary test environment, with one flat deterministic seed stream, so
pooled statistics are invariant to how the episodes are partitioned into runs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .env import MarketMakingEnv, QuoteAction
from .pipeline import Adversary

MODE_KEYS = ("n_none", "n_both", "n_ask", "n_bid")

RESULTS_HEADER = [
    "table", "adversary", "agent", "vol_train", "vol_test",
    "wealth_mean", "wealth_std", "sharpe", "inv_mean", "inv_std",
    "q_none", "q_both", "q_ask", "q_bid", "runs", "episodes", "seed",
]

DUMP_HEADER = ["seed", "terminal_wealth", "terminal_inventory",
               "n_none", "n_both", "n_ask", "n_bid"]


@dataclass(frozen=True)
class EpisodeResult:
    seed_index: int
    terminal_wealth: float
    terminal_inventory: int
    counts: tuple[int, int, int, int]  # (none, both, ask_only, bid_only)


@dataclass(frozen=True)
class EvalReport:
    wealth_mean: float
    wealth_std: float
    sharpe: float | None
    inventory_mean: float
    inventory_std: float
    quoting_pct: tuple[float, float, float, float]
    runs: int
    episodes_per_run: int
    base_seed: int


def sharpe(mean: float, std: float) -> float | None:
    """Mean over standard deviation; undefined (None) when the std is zero."""
    if std < 0:
        raise ValueError(f"std must be >= 0, got {std}")
    if std == 0:
        return None
    return mean / std


def quoting_percentages(counts: Sequence[int]) -> tuple[float, float, float, float]:
    total = sum(counts)
    if total <= 0:
        raise ValueError("no actions counted")
    return tuple(float(100.0 * c / total) for c in counts)  # type: ignore[return-value]


def format_quoting_ratio(counts: Sequence[int]) -> str:
    """The four-way 'none+both+ask+bid' percentage string, 2 d.p. each."""
    return "+".join(f"{p:.2f}" for p in quoting_percentages(counts))


def run_episode(
    env: MarketMakingEnv,
    policy: Callable[[np.ndarray], QuoteAction],
    adversary: Adversary,
    base_seed: int,
    index: int,
) -> EpisodeResult:
    """One deterministic evaluation episode under seed (base_seed, index)."""
    obs = env.reset(seed=(base_seed, index, 0))
    adversary.begin_episode(np.random.default_rng((base_seed, index, 1)))
    counts = [0, 0, 0, 0]
    done = False
    while not done:
        action = policy(obs)
        counts[int(action.mode)] += 1
        obs, _, _, done, _ = env.step(action, adversary.params(obs))
    from .market import wealth  # local import to avoid a cycle at module load

    state = env.state
    return EpisodeResult(
        seed_index=index,
        terminal_wealth=wealth(state.account, state.z),
        terminal_inventory=state.account.inventory,
        counts=(counts[0], counts[1], counts[2], counts[3]),
    )


def evaluate(
    env: MarketMakingEnv,
    policy: Callable[[np.ndarray], QuoteAction],
    adversary: Adversary,
    runs: int = 100,
    episodes: int = 1000,
    base_seed: int = 0,
) -> tuple[EvalReport, list[EpisodeResult]]:
    """Pooled statistics over runs*episodes episodes (flat seed stream)."""
    if runs < 1 or episodes < 1:
        raise ValueError(f"runs and episodes must be >= 1, got {runs}, {episodes}")
    results = [
        run_episode(env, policy, adversary, base_seed, i)
        for i in range(runs * episodes)
    ]
    return summarize(results, runs, episodes, base_seed), results


def summarize(
    results: Sequence[EpisodeResult], runs: int, episodes: int, base_seed: int
) -> EvalReport:
    w = np.array([r.terminal_wealth for r in results])
    h = np.array([r.terminal_inventory for r in results], dtype=np.float64)
    counts = np.sum([r.counts for r in results], axis=0)
    w_std = float(w.std(ddof=1)) if len(w) > 1 else 0.0
    h_std = float(h.std(ddof=1)) if len(h) > 1 else 0.0
    return EvalReport(
        wealth_mean=float(w.mean()),
        wealth_std=w_std,
        sharpe=sharpe(float(w.mean()), w_std),
        inventory_mean=float(h.mean()),
        inventory_std=h_std,
        quoting_pct=quoting_percentages(counts),
        runs=runs,
        episodes_per_run=episodes,
        base_seed=base_seed,
    )


def report_row(
    report: EvalReport,
    table: str,
    adversary: str,
    agent: str,
    vol_train: float,
    vol_test: float,
) -> dict:
    q = report.quoting_pct
    return {
        "table": table,
        "adversary": adversary,
        "agent": agent,
        "vol_train": vol_train,
        "vol_test": vol_test,
        "wealth_mean": repr(report.wealth_mean),
        "wealth_std": repr(report.wealth_std),
        "sharpe": "" if report.sharpe is None else repr(report.sharpe),
        "inv_mean": repr(report.inventory_mean),
        "inv_std": repr(report.inventory_std),
        "q_none": repr(q[0]),
        "q_both": repr(q[1]),
        "q_ask": repr(q[2]),
        "q_bid": repr(q[3]),
        "runs": report.runs,
        "episodes": report.episodes_per_run,
        "seed": report.base_seed,
    }


ADVERSARY_ORDER = {"fixed": 0, "random": 1, "a": 2, "b": 3, "k": 4, "all": 5}
AGENT_ORDER = {"always": 0, "two_action": 1, "four_action": 2}


def _row_key(row: dict) -> tuple:
    return (
        row["table"],
        ADVERSARY_ORDER.get(row["adversary"], 99),
        AGENT_ORDER.get(row["agent"], 99),
        float(row["vol_train"]),
        float(row["vol_test"]),
    )


def write_results_csv(path: str | Path, rows: list[dict]) -> Path:
    """Deterministically ordered results table, one row per evaluated cell."""
    if not rows:
        raise ValueError("no rows to write")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=RESULTS_HEADER)
        writer.writeheader()
        for row in sorted(rows, key=_row_key):
            writer.writerow(row)
    return path


def write_episode_dump(
    path: str | Path,
    results: Sequence[EpisodeResult],
    extra: dict | None = None,
) -> Path:
    """Per-episode audit rows; ``extra`` columns (e.g. adversary) are prepended."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    extra = extra or {}
    header = list(extra) + DUMP_HEADER
    with path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for r in results:
            writer.writerow(
                list(extra.values())
                + [r.seed_index, repr(float(r.terminal_wealth)),
                   int(r.terminal_inventory), *(int(c) for c in r.counts)]
            )
    return path
