import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hawkmm.env import (
    FIXED_ADVERSARY,
    AdversaryParams,
    MarketMakingEnv,
    QuoteAction,
    QuoteMode,
    RiskParams,
    decode_mm_action,
    observe,
    reward,
)
from hawkmm.hawkes import HawkesParams
from hawkmm.market import MarketParams, wealth

BOTH_UNIT = QuoteAction(QuoteMode.BOTH, 1.0, 1.0)
NONE = QuoteAction(QuoteMode.NONE)


def make_env(**kw):
    market = MarketParams(**kw)
    return MarketMakingEnv(market, HawkesParams(dt=market.dt))


class TestReset:
    def test_initial_state(self):
        env = make_env()
        obs = env.reset(seed=42)
        s = env.state
        assert s.z == s.z_prev == 100.0
        assert s.account.cash == 0.0 and s.account.inventory == 0
        assert s.hawkes.intensity_bid == s.hawkes.intensity_ask == 10.0
        assert s.step_index == 0
        np.testing.assert_allclose(obs, [0.0, 0.0, 0.0, 1.0, 1.0])

    def test_same_seed_bit_identical_trajectory(self):
        def run(seed):
            env = make_env()
            env.reset(seed)
            out = []
            for _ in range(env.market.n_steps):
                obs, r, _, done, info = env.step(BOTH_UNIT, FIXED_ADVERSARY)
                out.append((tuple(obs), r, done))
            return out

        assert run(7) == run(7)

    def test_different_seeds_differ(self):
        env1, env2 = make_env(), make_env()
        env1.reset(1)
        env2.reset(2)
        _, r1, _, _, i1 = env1.step(BOTH_UNIT, FIXED_ADVERSARY)
        _, r2, _, _, i2 = env2.step(BOTH_UNIT, FIXED_ADVERSARY)
        assert i1["dz"] != i2["dz"]

    def test_dt_mismatch_rejected(self):
        with pytest.raises(ValueError):
            MarketMakingEnv(MarketParams(dt=0.005), HawkesParams(dt=0.01))


class TestStep:
    def test_no_quotes_nothing_happens(self):
        env = make_env(sigma=0.0)
        env.reset(0)
        total = 0.0
        for _ in range(env.market.n_steps):
            _, r, _, done, _ = env.step(NONE, FIXED_ADVERSARY)
            total += r
        assert done
        assert env.state.account.cash == 0.0
        assert env.state.account.inventory == 0
        assert total == 0.0
        assert wealth(env.state.account, env.state.z) == 0.0

    def test_forced_round_trip_at_zero_offsets_is_flat(self):
        env = make_env(sigma=0.0, n_steps=1)
        env.reset(0)
        env._u_bid[:] = 0.0  # force both fills
        env._u_ask[:] = 0.0
        _, r, _, done, info = env.step(QuoteAction(QuoteMode.BOTH, 0.0, 0.0), FIXED_ADVERSARY)
        assert done
        assert info["fills"].bid_filled and info["fills"].ask_filled
        assert r == 0.0

    def test_step_after_done_raises(self):
        env = make_env(n_steps=1)
        env.reset(0)
        env.step(NONE, FIXED_ADVERSARY)
        with pytest.raises(RuntimeError):
            env.step(NONE, FIXED_ADVERSARY)

    def test_step_before_reset_raises(self):
        env = make_env()
        with pytest.raises(RuntimeError):
            env.step(NONE, FIXED_ADVERSARY)

    def test_zero_sum_exact(self):
        env = make_env(sigma=200.0)
        rng = np.random.default_rng(3)
        env.reset(rng.integers(2**32))
        for _ in range(500):
            if env.done:
                env.reset(rng.integers(2**32))
            action = QuoteAction(QuoteMode(rng.integers(4)), rng.uniform(0, 3), rng.uniform(0, 3))
            _, r_mm, r_adv, _, _ = env.step(action, FIXED_ADVERSARY)
            assert r_mm + r_adv == 0.0

    def test_rewards_telescope_to_terminal_wealth(self):
        env = make_env(sigma=2.0)
        rng = np.random.default_rng(5)
        for ep in range(3):
            env.reset(ep)
            total = 0.0
            while not env.done:
                action = QuoteAction(QuoteMode(rng.integers(4)), rng.uniform(0, 3), rng.uniform(0, 3))
                _, r, _, _, _ = env.step(action, FIXED_ADVERSARY)
                total += r
            final = wealth(env.state.account, env.state.z)
            assert total == pytest.approx(final, abs=1e-9)

    def test_accounting_identity_random_steps(self):
        env = make_env(sigma=200.0)
        rng = np.random.default_rng(8)
        env.reset(0)
        prev = env.state
        for i in range(2000):
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

    def test_unquoted_side_never_fills(self):
        env = make_env()
        env.reset(0)
        env._u_bid[:] = 0.0
        env._u_ask[:] = 0.0
        _, _, _, _, info = env.step(QuoteAction(QuoteMode.ASK_ONLY, 0.0, 0.0), FIXED_ADVERSARY)
        assert not info["fills"].bid_filled and info["fills"].ask_filled
        _, _, _, _, info = env.step(QuoteAction(QuoteMode.BID_ONLY, 0.0, 0.0), FIXED_ADVERSARY)
        assert info["fills"].bid_filled and not info["fills"].ask_filled

    def test_inventory_bound_blocks_side(self):
        env = make_env(h_min=-2, h_max=2, n_steps=50, sigma=0.0)
        env.reset(0)
        env._u_bid[:] = 0.0  # every quoted bid fills
        env._u_ask[:] = 1.0  # asks never fill
        inventories = []
        for _ in range(50):
            _, _, _, _, _ = env.step(QuoteAction(QuoteMode.BOTH, 0.0, 0.0), FIXED_ADVERSARY)
            inventories.append(env.state.account.inventory)
        assert max(inventories) == 2  # saturates at the bound, never beyond
        assert inventories[-1] == 2

    @given(
        modes=st.lists(st.integers(0, 3), min_size=30, max_size=30),
        seed=st.integers(0, 2**31),
    )
    @settings(max_examples=50, deadline=None)
    def test_inventory_never_exits_bounds(self, modes, seed):
        env = make_env(h_min=-1, h_max=1, n_steps=30, sigma=200.0)
        env.reset(seed)
        env._u_bid[:] = 0.0
        env._u_ask[:] = 0.0
        for m in modes:
            env.step(QuoteAction(QuoteMode(m), 0.0, 0.0), FIXED_ADVERSARY)
            assert -1 <= env.state.account.inventory <= 1

    def test_fill_rate_matches_path_probabilities(self):
        # oracle: fills ~ independent Bernoulli(p_n) along the realized path,
        # so the count lies within 3 sd of sum(p_n)
        env = make_env(n_steps=1000)
        fills = 0
        p_sum = 0.0
        p_var = 0.0
        for ep in range(100):
            env.reset(ep)
            while not env.done:
                _, _, _, _, info = env.step(QuoteAction(QuoteMode.BOTH, 0.0, 0.0), FIXED_ADVERSARY)
                for p, side in ((info["p_bid"], info["fills"].bid_filled),
                                (info["p_ask"], info["fills"].ask_filled)):
                    fills += side
                    p_sum += p
                    p_var += p * (1 - p)
        assert abs(fills - p_sum) < 3.0 * math.sqrt(p_var)

    def test_observation_finite_and_scaled(self):
        env = make_env(sigma=200.0)
        rng = np.random.default_rng(13)
        env.reset(99)
        while not env.done:
            obs, _, _, _, _ = env.step(
                QuoteAction(QuoteMode(rng.integers(4)), rng.uniform(0, 3), rng.uniform(0, 3)),
                FIXED_ADVERSARY,
            )
            assert np.all(np.isfinite(obs))
            assert 0.0 <= obs[0] <= 1.0

    def test_intensity_updates_use_adversary_baseline(self):
        env = make_env(n_steps=10)
        env.reset(0)
        env._u_bid[:] = 1.0  # no fills
        env._u_ask[:] = 1.0
        adv = AdversaryParams(b=0.0, a=12.5, k=1.5)
        env.step(NONE, adv)
        # one Euler step from 10 toward 12.5: 10 + 0.3*(12.5-10) = 10.75
        assert env.state.hawkes.intensity_bid == pytest.approx(10.75, abs=1e-12)


class TestReward:
    def test_running_penalty(self):
        assert reward(1.0, 3, RiskParams(0.0, 0.01), terminal=False) == pytest.approx(0.91)

    def test_risk_neutral_passthrough(self):
        assert reward(2.5, 5, RiskParams(0.0, 0.0), terminal=True) == 2.5

    def test_terminal_penalty(self):
        assert reward(0.0, 2, RiskParams(1.0, 0.0), terminal=True) == -4.0

    def test_terminal_step_example(self):
        r = reward(0.5, 2, RiskParams(0.1, 0.0), terminal=True)
        assert r == pytest.approx(0.1)


class TestDecode:
    def quoter(self, obs):
        return 1.2, 0.8

    def test_two_action_none(self):
        a = decode_mm_action("two_action", 0, self.quoter, None)
        assert a.mode is QuoteMode.NONE

    def test_two_action_both(self):
        a = decode_mm_action("two_action", 1, self.quoter, None)
        assert a.mode is QuoteMode.BOTH and (a.delta_bid, a.delta_ask) == (1.2, 0.8)

    def test_four_action_ask_only(self):
        a = decode_mm_action("four_action", 2, self.quoter, None)
        assert a.mode is QuoteMode.ASK_ONLY and a.delta_ask == 0.8

    def test_four_action_bid_only(self):
        a = decode_mm_action("four_action", 3, self.quoter, None)
        assert a.mode is QuoteMode.BID_ONLY and a.delta_bid == 1.2

    def test_always_passthrough(self):
        a = decode_mm_action("always", (0.0, 0.0))
        assert a.mode is QuoteMode.BOTH and a.delta_bid == a.delta_ask == 0.0

    def test_out_of_range_index(self):
        with pytest.raises(ValueError):
            decode_mm_action("two_action", 2, self.quoter, None)
        with pytest.raises(ValueError):
            decode_mm_action("four_action", 4, self.quoter, None)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            decode_mm_action("sometimes", 1, self.quoter, None)


class TestTypes:
    def test_adversary_ranges_enforced(self):
        with pytest.raises(ValueError):
            AdversaryParams(b=5.1)
        with pytest.raises(ValueError):
            AdversaryParams(a=7.0)
        with pytest.raises(ValueError):
            AdversaryParams(k=2.0)
        assert FIXED_ADVERSARY == AdversaryParams(0.0, 10.0, 1.5)

    def test_offset_range_enforced(self):
        with pytest.raises(ValueError):
            QuoteAction(QuoteMode.BOTH, -0.1, 1.0)
        with pytest.raises(ValueError):
            QuoteAction(QuoteMode.BOTH, 1.0, 3.1)

    def test_risk_params_nonnegative(self):
        with pytest.raises(ValueError):
            RiskParams(-0.1, 0.0)
