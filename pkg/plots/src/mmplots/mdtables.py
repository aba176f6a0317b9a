"""Markdown renditions of the results tables (paper-style layout)."""

from __future__ import annotations

from pathlib import Path

import pandas as pd

from .frames import TABLE_IDS, load_results

ADVERSARY_ORDER = ["fixed", "random", "a", "b", "k", "all"]
ADVERSARY_LABELS = {"fixed": "Fix", "random": "Random", "a": "A", "b": "B",
                    "k": "K", "all": "All"}

AGENT_ORDER = [
    ("always", 2.0, 2.0),
    ("two_action", 2.0, 2.0),
    ("four_action", 2.0, 2.0),
    ("four_action", 2.0, 200.0),
    ("four_action", 200.0, 200.0),
]

AGENT_NAMES = {"always": "Always Quoting MM", "two_action": "2-Action MM",
               "four_action": "4-Action MM"}

RISK_TITLES = {
    "rn": "eta = 0.0, zeta = 0.0 (RN)",
    "eta0.01": "eta = 0.01, zeta = 0.0",
    "eta0.1": "eta = 0.1, zeta = 0.0",
    "eta0.5": "eta = 0.5, zeta = 0.0",
    "eta1": "eta = 1.0, zeta = 0.0",
    "zeta0.01": "eta = 0.0, zeta = 0.01",
    "zeta0.001": "eta = 0.0, zeta = 0.001",
}


def agent_header(agent: str, vol_train: float, vol_test: float) -> str:
    name = AGENT_NAMES.get(agent, agent)
    if vol_train == vol_test:
        return f"{name} (Train & Test @ vol={vol_train:g})"
    return f"{name} (Train @ vol={vol_train:g}, Test @ vol={vol_test:g})"


def wealth_cell(mean: float, std: float) -> str:
    return f"{mean:.4f}±{std:.4f}"


def sharpe_cell(value) -> str:
    return "-" if pd.isna(value) else f"{float(value):.4f}"


def quoting_cell(row: pd.Series, agent: str) -> str:
    if agent == "always":
        return "-"  # always-quoting maker has no quoting decision to report
    return "+".join(f"{float(row[c]):.2f}" for c in ("q_none", "q_both", "q_ask", "q_bid"))


def render_table(
    results_path: str | Path, table_id: str, out_path: str | Path
) -> Path:
    """Write one markdown table: adversary row groups x agent columns, with
    the wealth/sharpe/inventory/quoting desiderata as sub-rows."""
    if table_id not in TABLE_IDS:
        raise ValueError(f"unknown table id {table_id!r}; expected one of {TABLE_IDS}")
    df = load_results(results_path)
    df = df[df["table"] == table_id]
    if len(df) == 0:
        raise ValueError(f"{results_path}: no rows for table {table_id!r}")

    cells = {}
    agents_present = []
    for agent, vt, vv in AGENT_ORDER:
        sub = df[(df["agent"] == agent) & (df["vol_train"] == vt) & (df["vol_test"] == vv)]
        if len(sub):
            agents_present.append((agent, vt, vv))
            for _, row in sub.iterrows():
                cells[(row["adversary"], agent, vt, vv)] = row
    adversaries = [a for a in ADVERSARY_ORDER if a in set(df["adversary"])]

    headers = ["Adversary", "Desiderata"] + [agent_header(*a) for a in agents_present]
    lines = [
        f"## Market makers trained with {RISK_TITLES[table_id]}",
        "",
        "| " + " | ".join(headers) + " |",
        "|" + "|".join("---" for _ in headers) + "|",
    ]
    for adv in adversaries:
        rows = {
            "Term. Wealth": [],
            "Sharpe": [],
            "Term. Inventory": [],
            "Quoting Ratio": [],
        }
        for agent, vt, vv in agents_present:
            row = cells.get((adv, agent, vt, vv))
            if row is None:
                for key in rows:
                    rows[key].append("-")
                continue
            rows["Term. Wealth"].append(wealth_cell(row["wealth_mean"], row["wealth_std"]))
            rows["Sharpe"].append(sharpe_cell(row["sharpe"]))
            rows["Term. Inventory"].append(wealth_cell(row["inv_mean"], row["inv_std"]))
            rows["Quoting Ratio"].append(quoting_cell(row, agent))
        label = ADVERSARY_LABELS.get(adv, adv)
        for i, (desideratum, values) in enumerate(rows.items()):
            first = label if i == 0 else ""
            lines.append("| " + " | ".join([first, desideratum] + values) + " |")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n")
    return out_path
