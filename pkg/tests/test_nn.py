import numpy as np
import pytest

from hawkmm.nn import (
    NetSpec,
    ReplayBuffer,
    Transition,
    adam_init,
    adam_step,
    backward,
    clone_params,
    flatten,
    forward,
    init_mlp,
    layer_sizes,
    load_net,
    save_net,
    soft_update,
)


def finite_diff_grads(loss_fn, params, h=1e-6):
    """Central differences of loss_fn(params) w.r.t. every parameter entry."""
    grads = []
    for li, (w, b) in enumerate(params):
        gw = np.zeros_like(w)
        gb = np.zeros_like(b)
        for arr, g in ((w, gw), (b, gb)):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                old = arr[idx]
                arr[idx] = old + h
                up = loss_fn(params)
                arr[idx] = old - h
                down = loss_fn(params)
                arr[idx] = old
                g[idx] = (up - down) / (2 * h)
        grads.append((gw, gb))
    return grads


def relative_error(analytic, numeric):
    a = np.concatenate([g.ravel() for g in flatten(analytic)])
    n = np.concatenate([g.ravel() for g in flatten(numeric)])
    return np.linalg.norm(a - n) / max(np.linalg.norm(a) + np.linalg.norm(n), 1e-12)


class TestForward:
    def test_identity_layer(self):
        params = [(np.eye(3), np.zeros(3))]
        x = np.array([1.0, -2.0, 3.0])
        np.testing.assert_array_equal(forward(params, x), x)

    def test_zero_weights_return_bias(self):
        params = [(np.zeros((2, 4)), np.array([0.5, -1.5]))]
        for x in (np.zeros(4), np.ones(4), np.arange(4.0)):
            np.testing.assert_array_equal(forward(params, x), [0.5, -1.5])

    def test_matches_hand_rolled_oracle(self):
        rng = np.random.default_rng(0)
        params = init_mlp([3, 4, 2], rng)
        x = rng.standard_normal(3)
        (w1, b1), (w2, b2) = params
        hidden = np.maximum(w1 @ x + b1, 0.0)
        expected = w2 @ hidden + b2
        np.testing.assert_allclose(forward(params, x), expected, atol=1e-12)

    def test_batch_equals_per_row(self):
        rng = np.random.default_rng(1)
        params = init_mlp([5, 8, 3], rng)
        xs = rng.standard_normal((6, 5))
        batch = forward(params, xs)
        for i in range(6):
            # GEMM and GEMV round differently in the last ulp
            np.testing.assert_allclose(batch[i], forward(params, xs[i]), rtol=1e-12)

    def test_positive_homogeneity_with_zero_bias(self):
        rng = np.random.default_rng(2)
        params = [(w, np.zeros_like(b)) for w, b in init_mlp([4, 6, 6, 2], rng)]
        x = rng.standard_normal(4)
        np.testing.assert_allclose(forward(params, 3.0 * x), 3.0 * forward(params, x), atol=1e-12)

    def test_shape_error(self):
        params = init_mlp([3, 2], np.random.default_rng(0))
        with pytest.raises(ValueError):
            forward(params, np.zeros(4))


class TestBackward:
    def test_linear_layer_closed_form(self):
        rng = np.random.default_rng(3)
        w = rng.standard_normal((2, 3))
        b = rng.standard_normal(2)
        x = rng.standard_normal(3)
        up = rng.standard_normal(2)
        grads, dx = backward([(w, b)], x, up)
        np.testing.assert_allclose(grads[0][0], np.outer(up, x), atol=1e-12)
        np.testing.assert_allclose(grads[0][1], up, atol=1e-12)
        np.testing.assert_allclose(dx, w.T @ up, atol=1e-12)

    def test_relu_blocks_gradient_at_negative_preactivation(self):
        # one hidden unit with forced-negative preactivation: no gradient flows
        params = [(np.array([[1.0]]), np.array([-5.0])), (np.array([[2.0]]), np.array([0.0]))]
        grads, dx = backward(params, np.array([1.0]), np.array([1.0]))
        assert grads[0][0][0, 0] == 0.0 and grads[0][1][0] == 0.0
        assert dx[0] == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        params = init_mlp([3, 5, 4, 2], rng)
        x = rng.standard_normal((4, 3))
        up = rng.standard_normal((4, 2))

        analytic, _ = backward(params, x, up)
        numeric = finite_diff_grads(lambda p: float(np.sum(forward(p, x) * up)), params)
        assert relative_error(analytic, numeric) < 1e-7

    def test_input_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        params = init_mlp([4, 6, 3], rng)
        x = rng.standard_normal(4)
        up = rng.standard_normal(3)
        _, dx = backward(params, x, up)
        h = 1e-6
        for i in range(4):
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            num = (np.sum(forward(params, xp) * up) - np.sum(forward(params, xm) * up)) / (2 * h)
            assert dx[i] == pytest.approx(num, rel=1e-6, abs=1e-9)

    def test_batch_mismatch_raises(self):
        params = init_mlp([3, 2], np.random.default_rng(0))
        with pytest.raises(ValueError):
            backward(params, np.zeros((4, 3)), np.zeros((5, 2)))


class TestAdam:
    def test_first_step_closed_form(self):
        # after one step: p' = p - lr * g / (|g| + eps)
        p = np.array([[1.0, -2.0]])
        params = [(p.copy(), np.array([0.5]))]
        g = np.array([[0.3, -0.7]])
        grads = [(g.copy(), np.array([0.1]))]
        state = adam_init(params)
        adam_step(params, grads, state, lr=0.01)
        np.testing.assert_allclose(
            params[0][0], p - 0.01 * g / (np.abs(g) + 1e-8), atol=1e-12
        )

    def test_zero_gradient_no_move(self):
        params = init_mlp([2, 2], np.random.default_rng(0))
        before = clone_params(params)
        zero = [(np.zeros_like(w), np.zeros_like(b)) for w, b in params]
        state = adam_init(params)
        adam_step(params, zero, state, lr=0.1)
        for (w, b), (w0, b0) in zip(params, before):
            np.testing.assert_array_equal(w, w0)
            np.testing.assert_array_equal(b, b0)

    def test_deterministic(self):
        def run():
            rng = np.random.default_rng(5)
            params = init_mlp([3, 4, 1], rng)
            state = adam_init(params)
            for _ in range(10):
                grads = [(np.ones_like(w) * 0.1, np.ones_like(b) * 0.1) for w, b in params]
                adam_step(params, grads, state, lr=1e-3)
            return params

        a, b = run(), run()
        for (wa, ba), (wb, bb) in zip(a, b):
            np.testing.assert_array_equal(wa, wb)
            np.testing.assert_array_equal(ba, bb)


class TestSoftUpdate:
    def test_tau_one_copies(self):
        t = [(np.zeros((2, 2)), np.zeros(2))]
        o = [(np.ones((2, 2)), np.ones(2))]
        soft_update(t, o, 1.0)
        np.testing.assert_array_equal(t[0][0], o[0][0])

    def test_tau_zero_keeps_target(self):
        t = [(np.full((2, 2), 5.0), np.full(2, 5.0))]
        o = [(np.ones((2, 2)), np.ones(2))]
        soft_update(t, o, 0.0)
        assert np.all(t[0][0] == 5.0)

    def test_midpoint(self):
        t = [(np.zeros((1, 1)), np.zeros(1))]
        o = [(np.full((1, 1), 2.0), np.full(1, 2.0))]
        soft_update(t, o, 0.5)
        assert t[0][0][0, 0] == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            soft_update([(np.zeros((2, 2)), np.zeros(2))], [(np.zeros((3, 2)), np.zeros(3))], 0.5)


class TestReplayBuffer:
    def tr(self, r, obs_dim=2):
        return Transition(np.full(obs_dim, r), np.array([r]), r, np.full(obs_dim, -r), False)

    def test_fifo_eviction(self):
        buf = ReplayBuffer(2, obs_dim=2)
        for r in (1.0, 2.0, 3.0):
            buf.push(self.tr(r))
        assert len(buf) == 2
        rng = np.random.default_rng(0)
        seen = set()
        for _ in range(64):
            seen.update(buf.sample(2, rng)["rew"].tolist())
        assert seen == {2.0, 3.0}

    def test_sample_returns_batch_size(self):
        buf = ReplayBuffer(200, obs_dim=2)
        for r in range(100):
            buf.push(self.tr(float(r)))
        batch = buf.sample(64, np.random.default_rng(1))
        assert batch["obs"].shape == (64, 2)
        assert batch["rew"].shape == (64,)

    def test_underfilled_sampling_raises(self):
        buf = ReplayBuffer(10, obs_dim=2)
        buf.push(self.tr(1.0))
        with pytest.raises(RuntimeError):
            buf.sample(2, np.random.default_rng(0))

    def test_sampling_uniform(self):
        buf = ReplayBuffer(10, obs_dim=1)
        for r in range(10):
            buf.push(Transition(np.zeros(1), np.zeros(1), float(r), np.zeros(1), False))
        rng = np.random.default_rng(2)
        n = 100_000
        rew = np.concatenate([buf.sample(10, rng)["rew"] for _ in range(n // 10)])
        counts = np.bincount(rew.astype(int), minlength=10)
        sd = np.sqrt(n * 0.1 * 0.9)
        assert np.all(np.abs(counts - n * 0.1) < 3 * sd)


class TestCheckpointIO:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(9)
        params = init_mlp([5, 64, 64, 4], rng)
        path = tmp_path / "net.json"
        save_net(path, params, meta={"seed": 9, "created_by": "test", "agent_kind": "sac"})
        loaded, meta = load_net(path)
        assert meta["seed"] == 9
        for (w, b), (lw, lb) in zip(params, loaded):
            np.testing.assert_array_equal(w, lw)
            np.testing.assert_array_equal(b, lb)

    def test_save_load_save_byte_identical(self, tmp_path):
        params = init_mlp([3, 8, 2], np.random.default_rng(4))
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_net(p1, params, meta={"seed": 4})
        loaded, meta = load_net(p1)
        save_net(p2, loaded, meta=meta)
        assert p1.read_bytes() == p2.read_bytes()

    def test_truncated_layer_names_layer(self, tmp_path):
        import json

        params = init_mlp([3, 4, 2], np.random.default_rng(0))
        path = tmp_path / "net.json"
        save_net(path, params)
        doc = json.loads(path.read_text())
        doc["layers"][1]["w"] = doc["layers"][1]["w"][:-1]  # drop a row
        path.write_text(json.dumps(doc))
        with pytest.raises(ValueError, match="layer 1"):
            load_net(path)

    def test_layer_sizes(self):
        params = init_mlp([5, 64, 64, 4], np.random.default_rng(0))
        assert layer_sizes(params) == [5, 64, 64, 4]


class TestNetSpec:
    def test_too_few_layers(self):
        with pytest.raises(ValueError):
            NetSpec((4,))

    def test_zero_width(self):
        with pytest.raises(ValueError):
            NetSpec((4, 0, 2))
