"""The two learners on one-step toy tasks (quick sanity, ~1 minute).

DQN on a two-armed bandit must find the paying arm; SAC on a 1-D quadratic
bandit must steer its deterministic action to the optimum at 0.7.

Run:  python3 demos/04_toy_learners.py
"""

import numpy as np

from hawkmm.dqn import DqnAgent, linear_epsilon
from hawkmm.nn import Transition
from hawkmm.sac import Box, SacAgent

obs = np.zeros(1)

print("DQN two-armed bandit (arm 1 pays 1, arm 0 pays 0):")
agent = DqnAgent(obs_dim=1, n_actions=2, hidden=(32, 32), seed=0)
rng = np.random.default_rng(0)
for step in range(3000):
    a = agent.act(obs, epsilon=linear_epsilon(step, 3000), rng=rng)
    agent.buffer.push(Transition(obs, a, float(a == 1), obs, True))
    if len(agent.buffer) >= 100:
        agent.train_step()
print(f"  greedy arm after 3000 steps: {agent.act(obs, epsilon=0.0)} (want 1)")

print("\nSAC 1-D bandit (reward -(a - 0.7)^2 on [0, 1]):")
sac = SacAgent(obs_dim=1, box=Box(np.array([0.0]), np.array([1.0])), hidden=(32, 32), seed=0)
rng = np.random.default_rng(1)
for step in range(6000):
    a = rng.uniform(0, 1, 1) if step < 500 else sac.act(obs)
    sac.buffer.push(Transition(obs, a, -float((a[0] - 0.7) ** 2), obs, True))
    if step >= 1000 and step % 1000 == 0:
        for _ in range(1000):
            sac.train_step()
    if step in (1000, 3000, 5999):
        det = float(sac.act(obs, deterministic=True)[0])
        print(f"  after {step + 1:5d} steps: deterministic action {det:.3f} (want 0.7), "
              f"alpha {sac.alpha:.3f}")
