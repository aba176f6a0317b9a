"""Mid-price dynamics and the accounting identity, step by step.

Run:  python3 demos/01_market_dynamics.py
"""

import numpy as np

from hawkmm.market import Account, Fills, MarketParams, apply_fills, quote_prices, step_price, wealth

rng = np.random.default_rng(7)
params = MarketParams()
print(f"market: z0={params.z0}, sigma={params.sigma}, dt={params.dt}, "
      f"{params.n_steps} steps, inventory in [{params.h_min}, {params.h_max}]")

# a short price path at each volatility regime
for sigma in (2.0, 200.0):
    z = params.z0
    path = [z]
    for _ in range(10):
        z = step_price(z, b=0.0, sigma=sigma, dt=params.dt, w=rng.standard_normal())
        path.append(z)
    print(f"\nsigma={sigma:>5}: " + " ".join(f"{p:8.2f}" for p in path))

# quotes around the mid
z = 100.0
bid, ask = quote_prices(z, delta_bid=0.8, delta_ask=1.2)
print(f"\nquotes at z={z}: bid {bid} (offset 0.8), ask {ask} (offset 1.2)")

# one settled round trip: buy at 99.2, sell at 101.2, pocket both offsets
account = Account()
account = apply_fills(account, Fills(bid_filled=True, ask_filled=True), z, 0.8, 1.2)
print(f"after a round trip: cash={account.cash:.2f}, inventory={account.inventory}, "
      f"wealth={wealth(account, z):.2f}")

# the identity dWealth = db*dN+ + da*dN- + H'*dZ, checked over random steps
print("\naccounting identity check over 1000 random fills and price moves:")
worst = 0.0
account = Account()
z = 100.0
for _ in range(1000):
    db, da = rng.uniform(0, 3, 2)
    fills = Fills(bid_filled=rng.random() < 0.3, ask_filled=rng.random() < 0.3)
    if account.inventory >= params.h_max:
        fills = Fills(False, fills.ask_filled)
    if account.inventory <= params.h_min:
        fills = Fills(fills.bid_filled, False)
    before = wealth(account, z)
    account = apply_fills(account, fills, z, db, da, h_min=params.h_min, h_max=params.h_max)
    z_next = step_price(z, 0.0, 2.0, params.dt, rng.standard_normal())
    got = wealth(account, z_next) - before
    expected = db * fills.bid_filled + da * fills.ask_filled + account.inventory * (z_next - z)
    worst = max(worst, abs(got - expected))
    z = z_next
print(f"worst |dWealth - identity| = {worst:.2e}")
