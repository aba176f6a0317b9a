"""Self-exciting execution intensities: decay, jumps, and fill clustering.

Run:  python3 demos/02_hawkes_executions.py
"""

import numpy as np

from hawkmm.hawkes import (
    HawkesParams,
    arrival_intensity,
    fill_probability,
    sample_fill,
    update_intensity,
)

params = HawkesParams()
print(f"params: reversion {params.mean_reversion_speed}, baseline {params.baseline_rate}, "
      f"jump {params.jump_size}, dt {params.dt}")

# a trade kicks the intensity up by jump_size; it then decays geometrically
# back toward the baseline (factor 0.7 per step with the defaults)
lam = params.baseline_rate
lam = update_intensity(lam, params, matched=True)
trace = [lam]
for _ in range(12):
    lam = update_intensity(lam, params, matched=False)
    trace.append(lam)
print("\nintensity after one fill, then no fills:")
print("  " + " ".join(f"{x:6.2f}" for x in trace))

# wider quotes shrink the effective arrival rate exponentially
print("\noffset -> per-step fill probability (k=1.5, lam=10):")
for delta in (0.0, 0.5, 1.0, 1.5, 2.0, 3.0):
    eff = arrival_intensity(10.0, 1.5, delta)
    print(f"  delta={delta:3.1f}: eff intensity {eff:6.3f}, "
          f"p(fill) {fill_probability(eff, params.dt):.4f}")

# self-excitation produces clustered fills versus a flat-intensity process
rng = np.random.default_rng(3)
lam = params.baseline_rate
hawkes_fills = []
for _ in range(400):
    p = fill_probability(arrival_intensity(lam, 1.5, 0.3), params.dt)
    hit = sample_fill(p, rng.random())
    hawkes_fills.append(hit)
    lam = update_intensity(lam, params, matched=hit)

flat_p = fill_probability(arrival_intensity(10.0, 1.5, 0.3), params.dt)
flat_fills = [sample_fill(flat_p, u) for u in rng.random(400)]


def runs_of_fills(fills):
    best = run = 0
    for f in fills:
        run = run + 1 if f else 0
        best = max(best, run)
    return best


print(f"\n400 steps quoting at offset 0.3:")
print(f"  self-exciting: {sum(hawkes_fills)} fills, longest streak {runs_of_fills(hawkes_fills)}")
print(f"  flat baseline: {sum(flat_fills)} fills, longest streak {runs_of_fills(flat_fills)}")
