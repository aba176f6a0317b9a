"""Experiment matrix: one results table = one adversary set x five agent cells.

Every trained strategy is evaluated in the fixed-adversary test environment;
the table's adversary column records the environment it was *trained* in.
The five agent cells mirror the results-table columns: the always-quoting
maker, the 2-action maker, and the 4-action maker in three volatility
configurations (train 2 / test 2, train 2 / test 200, train 200 / test 200,
the last reusing the low-volatility adversary and quoter).
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

from .config import PipelineConfig
from .env import RISK_TABLES, MarketMakingEnv
from .evaluation import (
    Adversary,
    EpisodeResult,
    evaluate,
    report_row,
    write_episode_dump,
    write_results_csv,
)
from .pipeline import (
    load_mm_policy,
    train_adversary,
    train_always_mm,
    train_multiaction_mm,
)

TABLE_ADVERSARIES = {
    table: (("fixed", "random", "a", "b", "k", "all") if table == "rn"
            else ("fixed", "random", "all"))
    for table in RISK_TABLES
}


def train_row(cfg: PipelineConfig, out_dir: str | Path | None = None) -> dict[str, Path | None]:
    """All training stages for one adversary row; returns manifest paths."""
    out = Path(out_dir) if out_dir else Path(cfg.out_dir)
    adv_ckpt = train_adversary(cfg, out / "adversary") if cfg.strategic else None
    always = train_always_mm(cfg, adv_ckpt, out / "always_mm")
    two = train_multiaction_mm(cfg, adv_ckpt, always, "two_action", out / "two_action")
    four_lo = train_multiaction_mm(cfg, adv_ckpt, always, "four_action", out / "four_action")
    # high-volatility 4-action training reuses the low-volatility sub-policies
    cfg_hi = replace(cfg, train_vol=200.0)
    four_hi = train_multiaction_mm(
        cfg_hi, adv_ckpt, always, "four_action", out / "four_action_vol200"
    )
    return {
        "adversary": adv_ckpt,
        "always": always,
        "two_action": two,
        "four_action": four_lo,
        "four_action_vol200": four_hi,
    }


def agent_cells(manifests: dict[str, Path | None]) -> list[tuple[str, Path, float, float]]:
    """(agent, manifest, vol_train, vol_test) for the five table columns."""
    return [
        ("always", manifests["always"], 2.0, 2.0),
        ("two_action", manifests["two_action"], 2.0, 2.0),
        ("four_action", manifests["four_action"], 2.0, 2.0),
        ("four_action", manifests["four_action"], 2.0, 200.0),
        ("four_action", manifests["four_action_vol200"], 200.0, 200.0),
    ]


def evaluate_cell(
    cfg: PipelineConfig,
    manifest: str | Path,
    vol_test: float,
    runs: int,
    episodes: int,
) -> tuple:
    env = MarketMakingEnv(replace(cfg.market, sigma=vol_test), cfg.hawkes, cfg.risk)
    policy = load_mm_policy(manifest)
    return evaluate(env, policy, Adversary("fixed"), runs, episodes, base_seed=cfg.seed)


def eval_protocol_size(scale: float) -> tuple[int, int]:
    """The full protocol is 100 runs x 1000 episodes; scale shrinks both."""
    return max(1, round(100 * scale)), max(1, round(1000 * scale))


def run_table(cfg: PipelineConfig, table_id: str, out_dir: str | Path | None = None) -> Path:
    """Train and evaluate every cell of one results table; returns the CSV path."""
    if table_id not in RISK_TABLES:
        raise ValueError(f"unknown table {table_id!r}; expected one of {sorted(RISK_TABLES)}")
    out = Path(out_dir) if out_dir else Path(cfg.out_dir) / f"table_{table_id}"
    runs, episodes = eval_protocol_size(cfg.scale)
    rows = []
    dumps: list[tuple[dict, list[EpisodeResult]]] = []
    for adv_kind in TABLE_ADVERSARIES[table_id]:
        row_cfg = replace(
            cfg, risk=RISK_TABLES[table_id], adversary=adv_kind,
            out_dir=str(out / adv_kind),
        )
        manifests = train_row(row_cfg)
        for agent, manifest, vol_train, vol_test in agent_cells(manifests):
            report, results = evaluate_cell(row_cfg, manifest, vol_test, runs, episodes)
            rows.append(
                report_row(report, table_id, adv_kind, agent, vol_train, vol_test)
            )
            dumps.append((
                {"table": table_id, "adversary": adv_kind, "agent": agent,
                 "vol_train": vol_train, "vol_test": vol_test},
                results,
            ))
    csv_path = write_results_csv(out / "results.csv", rows)
    _write_combined_dump(out / "episodes.csv", dumps)
    return csv_path


def _write_combined_dump(path: Path, dumps: list[tuple[dict, list[EpisodeResult]]]) -> None:
    import csv as _csv

    from .evaluation import DUMP_HEADER

    path.parent.mkdir(parents=True, exist_ok=True)
    keys = ["table", "adversary", "agent", "vol_train", "vol_test"]
    with path.open("w", newline="") as f:
        writer = _csv.writer(f)
        writer.writerow(keys + DUMP_HEADER)
        for extra, results in dumps:
            prefix = [extra[k] for k in keys]
            for r in results:
                writer.writerow(
                    prefix
                    + [r.seed_index, repr(float(r.terminal_wealth)),
                       int(r.terminal_inventory), *(int(c) for c in r.counts)]
                )
