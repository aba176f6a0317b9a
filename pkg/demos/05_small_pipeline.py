"""A miniature end-to-end run: train, checkpoint, evaluate, emit the CSV.

Uses a small schedule (300 episodes, ~2 minutes) so the numbers are rough;
the acceptance suite runs the real scaled protocol.

Run:  python3 demos/05_small_pipeline.py
"""

import tempfile
from pathlib import Path

from hawkmm.config import PipelineConfig, TrainSchedule
from hawkmm.evaluation import format_quoting_ratio, report_row, write_results_csv
from hawkmm.pipeline import train_always_mm, train_multiaction_mm
from hawkmm.tables import evaluate_cell

out = Path(tempfile.mkdtemp(prefix="hawkmm_demo_"))
cfg = PipelineConfig(
    adversary="fixed",
    sac=TrainSchedule(episodes=300, update_period=1000, lr=3e-4, batch=64, warmup_steps=1000),
    dqn=TrainSchedule(episodes=300, update_period=1, lr=1e-4, batch=64, warmup_steps=1000),
    seed=0,
    out_dir=str(out),
)

print(f"training always-quoting maker, {cfg.sac.episodes} episodes ...")
always = train_always_mm(cfg, None)
print(f"training 2-action maker, {cfg.dqn.episodes} episodes ...")
two = train_multiaction_mm(cfg, None, always, "two_action")

rows = []
for agent_name, manifest in (("always", always), ("two_action", two)):
    report, results = evaluate_cell(cfg, manifest, vol_test=2.0, runs=2, episodes=100)
    rows.append(report_row(report, "demo", "fixed", agent_name, 2.0, 2.0))
    counts = tuple(sum(r.counts[i] for r in results) for i in range(4))
    sharpe = "n/a" if report.sharpe is None else f"{report.sharpe:.4f}"
    print(f"  {agent_name:10s}: wealth {report.wealth_mean:.4f} +/- {report.wealth_std:.4f}, "
          f"sharpe {sharpe}, quoting {format_quoting_ratio(counts)}")

csv_path = write_results_csv(out / "results.csv", rows)
print(f"\nresults CSV: {csv_path}")
print(csv_path.read_text())
