"""One full episode against the fixed adversary, with a heuristic quoter.

Shows the observation vector, the zero-sum reward pair, and that the
risk-neutral rewards telescope to terminal wealth.

Run:  python3 demos/03_episode_walkthrough.py
"""

from hawkmm.env import FIXED_ADVERSARY, MarketMakingEnv, QuoteAction, QuoteMode
from hawkmm.market import wealth

env = MarketMakingEnv()
obs = env.reset(seed=42)
print("observation = [time fraction, H/h_max, dz zscore, lam_bid/base, lam_ask/base]")
print(f"at reset: {obs.round(3)}")

# heuristic: quote symmetric 0.7 offsets, skew away from inventory
total_mm = total_adv = 0.0
fills = 0
while not env.done:
    h = env.state.account.inventory
    action = QuoteAction(QuoteMode.BOTH,
                         delta_bid=min(3.0, 0.7 + 0.1 * max(h, 0)),
                         delta_ask=min(3.0, 0.7 + 0.1 * max(-h, 0)))
    obs, r_mm, r_adv, done, info = env.step(action, FIXED_ADVERSARY)
    assert r_mm + r_adv == 0.0  # zero-sum at every step
    total_mm += r_mm
    fills += info["fills"].bid_filled + info["fills"].ask_filled
    if env.state.step_index in (1, 50, 100, 200):
        print(f"step {env.state.step_index:3d}: z={env.state.z:7.3f} "
              f"H={env.state.account.inventory:+d} cash={env.state.account.cash:8.3f} "
              f"lam=({env.state.hawkes.intensity_bid:5.1f}, {env.state.hawkes.intensity_ask:5.1f})")

final = wealth(env.state.account, env.state.z)
print(f"\nfills: {fills}, terminal wealth: {final:.4f}")
print(f"sum of RN rewards:  {total_mm:.4f}  (telescopes to terminal wealth, "
      f"gap {abs(total_mm - final):.2e})")
