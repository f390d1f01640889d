import math

import numpy as np
import pytest

from motifdiff.denoiser import (
    Denoiser,
    DenoiserConfig,
    TrainConfig,
    grad,
    init_params,
    load_checkpoint,
    loss,
    loss_terms,
    predict,
    save_checkpoint,
    train,
)
from motifdiff.diffusion import NoiseSchedule
from motifdiff.errors import CheckpointError, ValidationError
from motifdiff.graphs import induced_subgraph

from .helpers import make_graph, permuted
from .oracles import random_typed_dag


def tiny_config(a=2, b=2, seed=0):
    return DenoiserConfig(
        alphabet=(a, b), hidden=8, layers=2, time_width=8, max_level=8,
        edge_loss_weight=5.0, seed=seed)


def noised_pair(rng, a=2, b=2, n=3):
    g0 = random_typed_dag(rng, n, a=a, b=b, density=0.5)
    gt = random_typed_dag(rng, n, a=a, b=b, density=0.5, connected=False)
    return (g0, gt, float(rng.random()))


class TestLevelFallback:
    def test_matches_graph_level_fallback(self):
        # the cached per-matrix level routine must agree with the public one
        from motifdiff.denoiser import _levels_from_matrix
        from motifdiff.graphs import acyclic_levels

        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(2, 7))
            et = (rng.random((n, n)) < 0.4).astype(np.int64)
            np.fill_diagonal(et, 0)
            from motifdiff.graphs import TypedDigraph

            g = TypedDigraph(rng.integers(0, 2, size=n).astype(np.int32),
                             et.astype(np.int32), (2, 2))
            assert _levels_from_matrix(et).tolist() == acyclic_levels(g)


class TestInitParams:
    def test_deterministic_per_seed(self):
        cfg = tiny_config()
        p1 = init_params(cfg, np.random.default_rng(3))
        p2 = init_params(cfg, np.random.default_rng(3))
        assert p1.keys() == p2.keys()
        for name in p1:
            assert np.array_equal(p1[name], p2[name])

    def test_seeds_differ(self):
        cfg = tiny_config()
        p1 = init_params(cfg, np.random.default_rng(1))
        p2 = init_params(cfg, np.random.default_rng(2))
        assert any(not np.array_equal(p1[n], p2[n]) for n in p1)

    def test_head_widths_follow_alphabet(self):
        cfg = tiny_config(a=3, b=4)
        params = init_params(cfg, np.random.default_rng(0))
        assert params["head_node_w"].shape == (8, 3)
        assert params["head_edge_w"].shape == (8, 4)


class TestPredict:
    def test_rows_normalized(self):
        cfg = tiny_config(a=3, b=2)
        params = init_params(cfg, np.random.default_rng(0))
        g = random_typed_dag(np.random.default_rng(1), 4, a=3, b=2)
        node_post, edge_post = predict(params, cfg, g, 0.3)
        assert np.allclose(node_post.sum(axis=-1), 1.0, atol=1e-9)
        assert np.allclose(edge_post.sum(axis=-1), 1.0, atol=1e-9)

    def test_deterministic(self):
        cfg = tiny_config()
        params = init_params(cfg, np.random.default_rng(0))
        g = random_typed_dag(np.random.default_rng(2), 4, a=2, b=2)
        out1 = predict(params, cfg, g, 0.5)
        out2 = predict(params, cfg, g, 0.5)
        assert np.array_equal(out1[0], out2[0])
        assert np.array_equal(out1[1], out2[1])

    def test_permutation_equivariance(self):
        cfg = tiny_config(a=3, b=3)
        params = init_params(cfg, np.random.default_rng(0))
        rng = np.random.default_rng(5)
        for _ in range(20):
            g = random_typed_dag(rng, 5, a=3, b=3, density=0.5)
            perm = rng.permutation(5)
            gp = permuted(g, perm)
            node_post, edge_post = predict(params, cfg, g, 0.4)
            node_post_p, edge_post_p = predict(params, cfg, gp, 0.4)
            for i in range(5):
                assert np.allclose(node_post_p[perm[i]], node_post[i], atol=1e-10)
                for j in range(5):
                    assert np.allclose(
                        edge_post_p[perm[i], perm[j]], edge_post[i, j], atol=1e-10)


class TestLoss:
    def test_uniform_head_value_by_hand(self):
        # zeroed heads make every posterior uniform: CE is ln(m) per slot
        cfg = tiny_config(a=2, b=2)
        params = init_params(cfg, np.random.default_rng(0))
        params["head_node_w"] = np.zeros_like(params["head_node_w"])
        params["head_node_b"] = np.zeros_like(params["head_node_b"])
        params["head_edge_w"] = np.zeros_like(params["head_edge_w"])
        params["head_edge_b"] = np.zeros_like(params["head_edge_b"])
        g0 = make_graph([0, 1], [(0, 1, 1)], a=2, b=2)
        value = loss(params, cfg, [(g0, g0, 0.2)])
        expected = 2 * math.log(2) + cfg.edge_loss_weight * 2 * math.log(2)
        assert math.isclose(value, expected, rel_tol=1e-12)

    def test_lambda_zero_ignores_edge_head(self):
        cfg = DenoiserConfig(alphabet=(2, 2), hidden=8, layers=2, time_width=8,
                             max_level=8, edge_loss_weight=0.0, seed=0)
        params = init_params(cfg, np.random.default_rng(0))
        rng = np.random.default_rng(1)
        batch = [noised_pair(rng) for _ in range(3)]
        v1 = loss(params, cfg, batch)
        params2 = dict(params)
        params2["head_edge_w"] = params["head_edge_w"] + 1.0
        v2 = loss(params2, cfg, batch)
        assert math.isclose(v1, v2, rel_tol=1e-12)

    def test_decomposition(self):
        cfg = tiny_config()
        params = init_params(cfg, np.random.default_rng(0))
        rng = np.random.default_rng(2)
        batch = [noised_pair(rng) for _ in range(4)]
        total, node_term, edge_term = loss_terms(params, cfg, batch)
        assert node_term >= 0 and edge_term >= 0
        assert math.isclose(total, node_term + cfg.edge_loss_weight * edge_term,
                            rel_tol=1e-12)

    def test_empty_batch_rejected(self):
        cfg = tiny_config()
        params = init_params(cfg, np.random.default_rng(0))
        with pytest.raises(ValidationError):
            loss(params, cfg, [])


def flatten(params):
    names = sorted(params)
    return np.concatenate([params[n].ravel() for n in names]), names


def unflatten(vec, params):
    names = sorted(params)
    out = {}
    off = 0
    for n in names:
        size = params[n].size
        out[n] = vec[off : off + size].reshape(params[n].shape)
        off += size
    return out


class TestGrad:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_central_differences(self, seed):
        cfg = tiny_config(a=2 + seed % 2, b=2, seed=seed)
        params = init_params(cfg, np.random.default_rng(seed))
        rng = np.random.default_rng(seed + 10)
        batch = [noised_pair(rng, a=cfg.alphabet[0]) for _ in range(2)]
        grads = grad(params, cfg, batch)
        vec, names = flatten(params)
        gvec, _ = flatten(grads)
        h = 1e-4
        coords = rng.choice(vec.size, size=10, replace=False)
        for ci in coords:
            vp = vec.copy()
            vp[ci] += h
            vm = vec.copy()
            vm[ci] -= h
            lp = loss(unflatten(vp, params), cfg, batch)
            lm = loss(unflatten(vm, params), cfg, batch)
            fd = (lp - lm) / (2 * h)
            denom = max(abs(fd), abs(gvec[ci]), 1e-3)
            assert abs(gvec[ci] - fd) / denom < 1e-4, (
                f"coord {ci}: grad {gvec[ci]} vs fd {fd}")

    def test_directional_derivative(self):
        cfg = tiny_config()
        params = init_params(cfg, np.random.default_rng(0))
        rng = np.random.default_rng(3)
        batch = [noised_pair(rng) for _ in range(2)]
        grads = grad(params, cfg, batch)
        vec, _ = flatten(params)
        gvec, _ = flatten(grads)
        direction = rng.normal(size=vec.size)
        direction /= np.linalg.norm(direction)
        h = 1e-5
        lp = loss(unflatten(vec + h * direction, params), cfg, batch)
        lm = loss(unflatten(vec - h * direction, params), cfg, batch)
        fd = (lp - lm) / (2 * h)
        assert abs(fd - gvec @ direction) / max(abs(fd), 1e-6) < 1e-5

    def test_edge_gradient_scales_with_lambda(self):
        base = tiny_config()
        double = DenoiserConfig(alphabet=(2, 2), hidden=8, layers=2, time_width=8,
                                max_level=8, edge_loss_weight=10.0, seed=0)
        params = init_params(base, np.random.default_rng(0))
        rng = np.random.default_rng(4)
        batch = [noised_pair(rng) for _ in range(2)]
        g1 = grad(params, base, batch)
        g2 = grad(params, double, batch)
        assert np.allclose(g2["head_edge_w"], 2 * g1["head_edge_w"], rtol=1e-12)
        assert np.allclose(g2["head_node_w"], g1["head_node_w"], rtol=1e-12)


class TestTrain:
    def test_memorizes_single_graph(self):
        cfg = DenoiserConfig(alphabet=(2, 2), hidden=24, layers=2, time_width=16,
                             max_level=8, edge_loss_weight=5.0, seed=0)
        tc = TrainConfig(epochs=200, batch_size=16, lr=2e-3, seed=0)
        g = make_graph([0, 1, 1], [(0, 1, 1), (1, 2, 1)], a=2, b=2)
        sched = NoiseSchedule()
        params, curve = train([g] * 16, cfg, tc, sched)
        assert curve[-1] < 0.1 * curve[0]

    def test_zero_epochs_returns_init(self):
        cfg = tiny_config()
        tc = TrainConfig(epochs=0, batch_size=4, seed=0)
        g = make_graph([0, 1], [(0, 1, 1)], a=2, b=2)
        params, curve = train([g] * 4, cfg, tc, NoiseSchedule())
        init = init_params(cfg, np.random.default_rng(cfg.seed))
        assert curve == []
        for name in init:
            assert np.array_equal(params[name], init[name])

    def test_end_to_end_determinism(self):
        cfg = tiny_config(seed=7)
        tc = TrainConfig(epochs=3, batch_size=4, seed=11)
        rng = np.random.default_rng(0)
        samples = [random_typed_dag(rng, 3, a=2, b=2) for _ in range(8)]
        p1, c1 = train(samples, cfg, tc, NoiseSchedule())
        p2, c2 = train(samples, cfg, tc, NoiseSchedule())
        assert c1 == c2
        for name in p1:
            assert np.array_equal(p1[name], p2[name])


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path):
        cfg = tiny_config(a=3, b=2, seed=5)
        params = init_params(cfg, np.random.default_rng(5))
        path = tmp_path / "model.ckpt"
        save_checkpoint(params, cfg, path)
        loaded, cfg2 = load_checkpoint(path)
        assert cfg2 == cfg
        for name in params:
            assert loaded[name].dtype == np.float64
            assert np.array_equal(loaded[name], params[name])

    def test_trailing_garbage_rejected(self, tmp_path):
        cfg = tiny_config()
        params = init_params(cfg, np.random.default_rng(0))
        path = tmp_path / "model.ckpt"
        save_checkpoint(params, cfg, path)
        with open(path, "ab") as fh:
            fh.write(b"xx")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_truncation_rejected(self, tmp_path):
        cfg = tiny_config()
        params = init_params(cfg, np.random.default_rng(0))
        path = tmp_path / "model.ckpt"
        save_checkpoint(params, cfg, path)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) - 17])
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_shape_mismatch_rejected(self, tmp_path):
        cfg = tiny_config()
        params = init_params(cfg, np.random.default_rng(0))
        params["head_node_w"] = np.zeros((3, 3))  # wrong shape for config
        path = tmp_path / "model.ckpt"
        save_checkpoint(params, cfg, path)
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_denoiser_wrapper(self, tmp_path):
        cfg = tiny_config()
        params = init_params(cfg, np.random.default_rng(0))
        d = Denoiser(cfg, params)
        path = tmp_path / "model.ckpt"
        d.save(path)
        d2 = Denoiser.load(path)
        g = make_graph([0, 1], [(0, 1, 1)], a=2, b=2)
        assert np.array_equal(d.predict(g, 0.3)[0], d2.predict(g, 0.3)[0])

    def test_posterior_fn_matches_predict(self):
        cfg = tiny_config()
        params = init_params(cfg, np.random.default_rng(0))
        d = Denoiser(cfg, params)
        g = make_graph([0, 1, 0], [(0, 1, 1), (1, 2, 1)], a=2, b=2)
        fn = d.posterior_fn()
        nodes = g.node_types.astype(np.int64)[None, :]
        edges = g.edge_types.astype(np.int64)[None, :, :]
        node_post, edge_post = fn(nodes, edges, 0.6)
        ref_n, ref_e = d.predict(g, 0.6)
        assert np.allclose(node_post[0], ref_n)
        assert np.allclose(edge_post[0], ref_e)
