"""Command-line entry points.

    hawkmm train-adversary --adversary all --vol 2 --out runs/demo --scale 0.01
    hawkmm train-mm --kind always --adversary fixed --out runs/demo --scale 0.01
    hawkmm evaluate --ckpt runs/demo/always_mm --vol 2 --runs 10 --episodes 100
    hawkmm reproduce-table --table rn --scale 0.001 --out runs/rn
    hawkmm selftest
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from dataclasses import replace
from pathlib import Path

# single-threaded BLAS: the matrices are tiny and reductions stay bit-stable
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np


def _base_config(args) -> "PipelineConfig":
    from .config import PipelineConfig, load_config

    cfg = load_config(args.config) if args.config else PipelineConfig()
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        updates["out_dir"] = args.out
    if getattr(args, "vol", None) is not None:
        updates["train_vol"] = args.vol
    if getattr(args, "adversary", None) is not None:
        updates["adversary"] = args.adversary
    if getattr(args, "scale", None) is not None:
        updates["scale"] = args.scale
    return replace(cfg, **updates) if updates else cfg


def _add_common(p: argparse.ArgumentParser, scale: bool = True) -> None:
    p.add_argument("--config", help="JSON config file mirroring PipelineConfig")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="output directory")
    p.add_argument("--vol", type=float, default=None, help="training volatility")
    p.add_argument(
        "--adversary", choices=["fixed", "random", "all", "a", "b", "k"], default=None
    )
    if scale:
        p.add_argument("--scale", type=float, default=None,
                       help="episode-count multiplier (1.0 = paper scale)")


def cmd_train_adversary(args) -> int:
    from .pipeline import train_adversary

    cfg = _base_config(args)
    manifest = train_adversary(cfg)
    print(f"adversary checkpoint: {manifest}")
    return 0


def cmd_train_mm(args) -> int:
    from .pipeline import train_always_mm, train_multiaction_mm

    cfg = _base_config(args)
    out = Path(cfg.out_dir)
    adv_ckpt = args.adversary_ckpt
    if adv_ckpt is None and cfg.strategic:
        candidate = out / "adversary" / "manifest.json"
        adv_ckpt = candidate if candidate.exists() else None
    kind = {"always": "always", "2action": "two_action", "4action": "four_action"}[args.kind]
    if kind == "always":
        manifest = train_always_mm(cfg, adv_ckpt)
    else:
        always = args.always_ckpt or out / "always_mm" / "manifest.json"
        manifest = train_multiaction_mm(cfg, adv_ckpt, always, kind)
    print(f"{kind} checkpoint: {manifest}")
    return 0


def cmd_evaluate(args) -> int:
    from .config import PipelineConfig, load_config
    from .env import MarketMakingEnv
    from .evaluation import (
        evaluate,
        format_quoting_ratio,
        report_row,
        write_episode_dump,
        write_results_csv,
    )
    from .pipeline import Adversary, load_manifest, load_mm_policy, load_sac_checkpoint

    cfg = load_config(args.config) if args.config else PipelineConfig()
    manifest = load_manifest(args.ckpt)
    meta = manifest.get("meta", {})
    env = MarketMakingEnv(
        replace(cfg.market, sigma=args.vol), cfg.hawkes, cfg.risk
    )
    adversary_kind = args.adversary or "fixed"
    policy_agent = None
    if adversary_kind in ("all", "a", "b", "k"):
        if not args.adversary_ckpt:
            print("strategic test adversary needs --adversary-ckpt", file=sys.stderr)
            return 2
        policy_agent = load_sac_checkpoint(args.adversary_ckpt)
    adversary = Adversary(adversary_kind, policy_agent)
    policy = load_mm_policy(args.ckpt)
    seed = args.seed if args.seed is not None else cfg.seed
    report, results = evaluate(env, policy, adversary, args.runs, args.episodes, seed)

    agent = meta.get("agent_kind", manifest["agent"])
    row = report_row(
        report,
        table=args.table,
        adversary=meta.get("adversary_kind", "unknown"),
        agent=agent,
        vol_train=meta.get("train_vol", float("nan")),
        vol_test=args.vol,
    )
    counts = np.sum([r.counts for r in results], axis=0)
    print(
        f"wealth {report.wealth_mean:.4f} +/- {report.wealth_std:.4f}  "
        f"sharpe {'n/a' if report.sharpe is None else f'{report.sharpe:.4f}'}  "
        f"inventory {report.inventory_mean:.4f} +/- {report.inventory_std:.4f}  "
        f"quoting {format_quoting_ratio(counts)}"
    )
    if args.out:
        path = write_results_csv(args.out, [row])
        print(f"results: {path}")
    if args.dump_episodes:
        path = write_episode_dump(
            args.dump_episodes, results,
            extra={"adversary": row["adversary"], "agent": agent},
        )
        print(f"episode dump: {path}")
    return 0


def cmd_reproduce_table(args) -> int:
    from .tables import run_table

    cfg = _base_config(args)
    csv_path = run_table(cfg, args.table)
    print(f"table written: {csv_path}")
    return 0


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------


def _check_accounting_identity() -> None:
    from .env import FIXED_ADVERSARY, MarketMakingEnv, QuoteAction, QuoteMode
    from .hawkes import HawkesParams
    from .market import MarketParams

    env = MarketMakingEnv(MarketParams(sigma=200.0), HawkesParams())
    rng = np.random.default_rng(0)
    env.reset(0)
    prev = env.state
    for i in range(10_000):
        if env.done:
            env.reset(i)
            prev = env.state
        action = QuoteAction(QuoteMode(rng.integers(4)), rng.uniform(0, 3), rng.uniform(0, 3))
        _, _, _, _, info = env.step(action, FIXED_ADVERSARY)
        cur = env.state
        fills = info["fills"]
        expected = (
            action.delta_bid * fills.bid_filled
            + action.delta_ask * fills.ask_filled
            + cur.account.inventory * (cur.z - prev.z)
        )
        assert abs(info["delta_wealth"] - expected) < 1e-9
        prev = cur


def _check_hawkes_decay() -> None:
    from .hawkes import HawkesParams, update_intensity

    lam, params = 50.0, HawkesParams()
    for n in range(1, 51):
        lam = update_intensity(lam, params, matched=False)
        assert abs((lam - 10.0) - 40.0 * 0.7**n) < 1e-12


def _check_fill_probability() -> None:
    from .hawkes import fill_probability, sample_fill

    p = fill_probability(10.0, 0.005)
    assert abs(p - 0.04877057549928599) < 1e-12
    rng = np.random.default_rng(1)
    n = 10_000
    hits = int(np.sum(rng.random(n) < p))
    assert abs(hits / n - p) < 3.0 * np.sqrt(p * (1 - p) / n)
    assert sample_fill(1.0, 0.999) and not sample_fill(0.0, 0.0)


def _check_zero_sum() -> None:
    from .env import FIXED_ADVERSARY, MarketMakingEnv, QuoteAction, QuoteMode
    from .env import RiskParams
    from .hawkes import HawkesParams
    from .market import MarketParams

    env = MarketMakingEnv(MarketParams(), HawkesParams(), RiskParams(0.5, 0.01))
    rng = np.random.default_rng(2)
    env.reset(0)
    for i in range(10_000):
        if env.done:
            env.reset(i)
        action = QuoteAction(QuoteMode(rng.integers(4)), rng.uniform(0, 3), rng.uniform(0, 3))
        _, r_mm, r_adv, _, _ = env.step(action, FIXED_ADVERSARY)
        assert r_mm + r_adv == 0.0


def _check_gradients() -> None:
    from .dqn import dqn_loss, dqn_loss_and_grads
    from .nn import flatten, init_mlp
    from .sac import Box, actor_loss, actor_loss_and_grads, critic_loss, critic_loss_and_grads

    def rel_err(a_grads, n_grads):
        a = np.concatenate([g.ravel() for g in flatten(a_grads)])
        n = np.concatenate([g.ravel() for g in flatten(n_grads)])
        return np.linalg.norm(a - n) / max(np.linalg.norm(a) + np.linalg.norm(n), 1e-12)

    def fd(loss_fn, params, h=1e-6):
        grads = []
        for w, b in params:
            gw, gb = np.zeros_like(w), np.zeros_like(b)
            for arr, g in ((w, gw), (b, gb)):
                it = np.nditer(arr, flags=["multi_index"])
                for _ in it:
                    i = it.multi_index
                    old = arr[i]
                    arr[i] = old + h
                    up = loss_fn()
                    arr[i] = old - h
                    down = loss_fn()
                    arr[i] = old
                    g[i] = (up - down) / (2 * h)
            grads.append((gw, gb))
        return grads

    for seed in (0, 1):
        rng = np.random.default_rng(seed)
        box = Box(np.zeros(2), np.ones(2) * 3)
        q1, q2 = init_mlp([5, 6, 1], rng), init_mlp([5, 6, 1], rng)
        actor = init_mlp([3, 6, 4], rng)
        obs = rng.standard_normal((6, 3))
        act = rng.uniform(0, 3, (6, 2))
        y = rng.standard_normal((6, 1))
        _, g = critic_loss_and_grads(q1, obs, act, y)
        assert rel_err(g, fd(lambda: critic_loss(q1, obs, act, y), q1)) < 1e-4
        xi = rng.standard_normal((6, 2))
        _, g, _ = actor_loss_and_grads(actor, q1, q2, 0.2, obs, xi, box)
        assert rel_err(g, fd(lambda: actor_loss(actor, q1, q2, 0.2, obs, xi, box), actor)) < 1e-4
        qd = init_mlp([3, 6, 4], rng)
        qt = init_mlp([3, 6, 4], rng)
        batch = {
            "obs": rng.standard_normal((6, 3)),
            "act": rng.integers(0, 4, 6),
            "rew": rng.standard_normal(6),
            "next_obs": rng.standard_normal((6, 3)),
            "done": (rng.random(6) < 0.5).astype(float),
        }
        _, g = dqn_loss_and_grads(qd, qt, batch, gamma=0.9)
        assert rel_err(g, fd(lambda: dqn_loss(qd, qt, batch, gamma=0.9), qd)) < 1e-4


def _check_checkpoint_roundtrip() -> None:
    import tempfile

    from .pipeline import MM_BOX, load_sac_checkpoint, save_sac_checkpoint
    from .sac import SacAgent

    agent = SacAgent(obs_dim=5, box=MM_BOX, hidden=(8, 8), seed=3)
    rng = np.random.default_rng(3)
    with tempfile.TemporaryDirectory() as tmp:
        manifest = save_sac_checkpoint(tmp, agent, {"seed": 3})
        loaded = load_sac_checkpoint(manifest)
        for _ in range(100):
            obs = rng.standard_normal(5)
            a = agent.act(obs, deterministic=True)
            b = loaded.act(obs, deterministic=True)
            assert np.array_equal(a, b)


def _check_env_determinism() -> None:
    from .env import FIXED_ADVERSARY, MarketMakingEnv, QuoteAction, QuoteMode

    def run():
        env = MarketMakingEnv()
        env.reset(99)
        acc = 0.0
        while not env.done:
            _, r, _, _, _ = env.step(QuoteAction(QuoteMode.BOTH, 1.0, 1.0), FIXED_ADVERSARY)
            acc += r
        return acc

    assert run() == run()


SELFTEST_CHECKS = [
    ("accounting identity (10k random steps)", _check_accounting_identity),
    ("hawkes geometric decay law", _check_hawkes_decay),
    ("fill probability reference + empirical", _check_fill_probability),
    ("zero-sum rewards (10k steps)", _check_zero_sum),
    ("loss gradients vs finite differences", _check_gradients),
    ("checkpoint round-trip policy equivalence", _check_checkpoint_roundtrip),
    ("environment determinism", _check_env_determinism),
]


def cmd_selftest(args) -> int:
    failures = 0
    for name, check in SELFTEST_CHECKS:
        try:
            check()
        except Exception:
            failures += 1
            print(f"[FAIL] {name}")
            traceback.print_exc()
        else:
            print(f"[PASS] {name}")
    if failures:
        print(f"{failures}/{len(SELFTEST_CHECKS)} checks failed")
        return 1
    print(f"all {len(SELFTEST_CHECKS)} checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hawkmm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-adversary", help="SAC-train a strategic adversary")
    _add_common(p)
    p.set_defaults(fn=cmd_train_adversary)

    p = sub.add_parser("train-mm", help="train a market-maker agent")
    _add_common(p)
    p.add_argument("--kind", choices=["always", "2action", "4action"], required=True)
    p.add_argument("--adversary-ckpt", help="manifest of a trained adversary")
    p.add_argument("--always-ckpt", help="manifest of the trained always-quote MM")
    p.set_defaults(fn=cmd_train_mm)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint in the fixed test environment")
    p.add_argument("--ckpt", required=True, help="checkpoint manifest or directory")
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--vol", type=float, default=2.0, help="test volatility")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--adversary", choices=["fixed", "random", "all", "a", "b", "k"],
                   default="fixed")
    p.add_argument("--adversary-ckpt")
    p.add_argument("--table", default="custom", help="table label for the CSV row")
    p.add_argument("--out", help="results CSV path")
    p.add_argument("--dump-episodes", help="per-episode audit CSV path")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("reproduce-table", help="train + evaluate one results table")
    _add_common(p)
    p.add_argument(
        "--table", required=True,
        choices=["rn", "eta0.01", "eta0.1", "eta0.5", "eta1", "zeta0.01", "zeta0.001"],
    )
    p.set_defaults(fn=cmd_reproduce_table)

    p = sub.add_parser("selftest", help="fast invariant checks, pass/fail per line")
    p.set_defaults(fn=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
