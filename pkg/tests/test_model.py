import dataclasses

import numpy as np
import pytest

from gcnlrp.corpus import (
    Edge,
    LabeledDataset,
    NormalizedAdjacency,
    SentenceGraph,
    build_adjacency,
    load_embeddings,
)
from gcnlrp.linalg import ShapeError, softmax_cross_entropy
from gcnlrp.model import (
    CheckpointError,
    ModelParams,
    TrainConfig,
    forward,
    forward_batch,
    gradients,
    init_params,
    load_checkpoint,
    predict,
    predict_from,
    save_checkpoint,
    train,
)


def ones_params(d, f1, f2, c=5):
    return ModelParams(
        w0=np.ones((d, f1)),
        w1=np.ones((f1, f2)),
        wfc=np.ones((f2, c)),
        embed_dim=d,
        hidden1=f1,
        hidden2=f2,
        n_classes=c,
        seed=0,
    )


def random_instance(rng, n, d, f1, f2, c=5):
    """A random graph adjacency, in-bounds features and clamped params."""
    edges = [Edge(rng.integers(0, dep), dep, "dep") for dep in range(1, n)]
    graph = SentenceGraph("r", ["w"] * n, [Edge(int(e.head), e.dependent, e.deplabel) for e in edges], "METHOD")
    adjacency = build_adjacency(graph)
    h0 = rng.normal(size=(n, d))
    params = init_params(d, f1, f2, c, seed=int(rng.integers(1 << 30)))
    return graph, adjacency, h0, params


class TestForward:
    def test_tiny_hand_example(self):
        # d = f1 = f2 = 1, everything 1: relu never clips, logit = 1
        params = ones_params(1, 1, 1, 1)
        adjacency = NormalizedAdjacency(np.array([[1.0]]))
        cache = forward(params, adjacency, np.array([[1.0]]))
        assert cache.logits[0, 0] == pytest.approx(1.0)
        np.testing.assert_array_equal(cache.pool_argmax, [0])

    def test_zero_features_give_zero_logits(self):
        params = init_params(3, 4, 4, seed=1)
        adjacency = NormalizedAdjacency(np.array([[1.0]]))
        cache = forward(params, adjacency, np.zeros((1, 3)))
        np.testing.assert_array_equal(cache.logits, np.zeros((1, 5)))

    def test_scaling_single_adjacency_entry(self):
        params = ones_params(1, 1, 1, 1)
        single = forward(params, NormalizedAdjacency(np.array([[1.0]])), np.array([[1.0]]))
        doubled = forward(params, NormalizedAdjacency(np.array([[2.0]])), np.array([[1.0]]))
        assert doubled.h1[0, 0] == pytest.approx(2.0 * single.h1[0, 0])
        # the chain is linear at positive 1-dim activations: two crossings -> x4
        assert doubled.logits[0, 0] == pytest.approx(4.0 * single.logits[0, 0])

    def test_shape_error_names_stage(self):
        params = init_params(3, 4, 4, seed=0)
        adjacency = NormalizedAdjacency(np.eye(2))
        with pytest.raises(ShapeError, match="feature projection 1"):
            forward(params, adjacency, np.zeros((2, 7)))
        with pytest.raises(ShapeError, match="adjacency projection 1"):
            forward(params, adjacency, np.zeros((3, 3)))

    def test_logits_nonnegative_with_clamped_head(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            _, adjacency, h0, params = random_instance(rng, 4, 3, 4, 4)
            cache = forward(params, adjacency, h0)
            assert (cache.logits >= 0).all()

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(11)
        graph, adjacency, h0, params = random_instance(rng, 5, 3, 4, 4)
        perm = rng.permutation(graph.n)
        p = np.eye(graph.n)[perm]
        permuted_adjacency = NormalizedAdjacency(p @ adjacency.matrix @ p.T)
        base = forward(params, adjacency, h0)
        moved = forward(params, permuted_adjacency, p @ h0)
        np.testing.assert_allclose(moved.h2, p @ base.h2, atol=1e-10)
        np.testing.assert_allclose(moved.pooled, base.pooled, atol=1e-10)
        np.testing.assert_allclose(moved.logits, base.logits, atol=1e-10)


class TestGradients:
    def test_zero_features_give_zero_gradients(self):
        params = init_params(3, 4, 4, seed=2)
        adjacency = NormalizedAdjacency(np.array([[1.0]]))
        _, grads = gradients(params, adjacency, np.zeros((1, 3)), 2)
        np.testing.assert_array_equal(grads.w0, np.zeros_like(params.w0))
        np.testing.assert_array_equal(grads.w1, np.zeros_like(params.w1))
        np.testing.assert_array_equal(grads.wfc, np.zeros_like(params.wfc))

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_matches_central_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        _, adjacency, h0, params = random_instance(rng, 3, 4, 3, 3)
        gold = int(rng.integers(5))
        _, grads = gradients(params, adjacency, h0, gold)
        h = 1e-5
        for name in ("w0", "w1", "wfc"):
            analytic = getattr(grads, name)
            matrix = getattr(params, name)
            numeric = np.zeros_like(matrix)
            for i in range(matrix.shape[0]):
                for j in range(matrix.shape[1]):
                    saved = matrix[i, j]
                    matrix[i, j] = saved + h
                    up = softmax_cross_entropy(forward(params, adjacency, h0).logits, gold)[0]
                    matrix[i, j] = saved - h
                    down = softmax_cross_entropy(forward(params, adjacency, h0).logits, gold)[0]
                    matrix[i, j] = saved
                    numeric[i, j] = (up - down) / (2 * h)
            denom = np.maximum(np.abs(numeric), 1e-4)
            assert (np.abs(analytic - numeric) / denom < 1e-4).all(), name

    def test_clamped_entry_can_recover(self):
        # an entry floored at 0 whose gradient is negative moves positive on
        # the next step: the clamp floors post-update values only
        from gcnlrp.linalg import AdamState, adam_step, clamp_nonnegative

        wfc = np.array([[0.0]])
        grad = np.array([[-1.0]])
        state = AdamState.for_param(wfc, learning_rate=0.1)
        updated = clamp_nonnegative(adam_step(wfc, grad, state))
        assert updated[0, 0] > 0.0


class TestBatching:
    def test_block_diagonal_matches_single(self):
        rng = np.random.default_rng(7)
        params = init_params(3, 4, 4, seed=9)
        adjacencies, features = [], []
        for n in (1, 3, 5, 2):
            graph, adjacency, h0, _ = random_instance(rng, n, 3, 4, 4)
            adjacencies.append(adjacency)
            features.append(h0)
        batch = forward_batch(params, adjacencies, features)
        for b, (adjacency, h0) in enumerate(zip(adjacencies, features)):
            single = forward(params, adjacency, h0)
            np.testing.assert_allclose(
                batch.logits[b : b + 1], single.logits, rtol=0, atol=1e-10
            )

    def test_batch_of_one_matches_single_exactly(self):
        rng = np.random.default_rng(8)
        _, adjacency, h0, params = random_instance(rng, 4, 3, 4, 4)
        batch = forward_batch(params, [adjacency], [h0])
        single = forward(params, adjacency, h0)
        np.testing.assert_array_equal(batch.logits, single.logits)


def tiny_dataset(n_graphs=1):
    graphs = [
        SentenceGraph(f"t{i}", ["alpha", "beta"], [Edge(0, 1, "dep")], "METHOD")
        for i in range(n_graphs)
    ]
    return LabeledDataset(graphs, [], [])


def tiny_table():
    return load_embeddings(["2 2", "alpha 1.0 -0.5", "beta 0.25 2.0"], {"alpha", "beta"})


class TestTrain:
    def test_overfit_single_graph_reduces_loss(self):
        dataset = tiny_dataset()
        config = TrainConfig(hidden1=4, hidden2=4, epochs=40, batch_size=1, seed=0)
        result = train(dataset, tiny_table(), config)
        assert result.log[-1].train_loss < result.log[0].train_loss

    def test_zero_learning_rate_is_a_null_update(self):
        dataset = tiny_dataset(3)
        config = TrainConfig(hidden1=4, hidden2=4, epochs=3, learning_rate=0.0, seed=0)
        result = train(dataset, tiny_table(), config)
        fresh = init_params(2, 4, 4, seed=0)
        np.testing.assert_array_equal(result.params.w0, fresh.w0)
        np.testing.assert_array_equal(result.params.w1, fresh.w1)
        np.testing.assert_array_equal(result.params.wfc, fresh.wfc)

    def test_same_seed_same_checkpoint(self, tmp_path):
        dataset = tiny_dataset(4)
        config = TrainConfig(hidden1=4, hidden2=4, epochs=5, batch_size=2, seed=3)
        a = train(dataset, tiny_table(), config)
        b = train(dataset, tiny_table(), config)
        save_checkpoint(a.params, tmp_path / "a.ckpt")
        save_checkpoint(b.params, tmp_path / "b.ckpt")
        assert (tmp_path / "a.ckpt").read_bytes() == (tmp_path / "b.ckpt").read_bytes()

    def test_empty_train_split_rejected(self):
        with pytest.raises(ValueError, match="empty train split"):
            train(LabeledDataset([], [], []), tiny_table(), TrainConfig())

    def test_wfc_nonnegative_after_every_step(self):
        minima = []
        dataset = tiny_dataset(4)
        config = TrainConfig(hidden1=4, hidden2=4, epochs=4, batch_size=2, seed=1)
        train(dataset, tiny_table(), config, post_step_hook=lambda p: minima.append(p.wfc.min()))
        assert minima, "hook never ran"
        assert all(m >= 0.0 for m in minima)


class TestPredict:
    def test_argmax(self):
        params = init_params(2, 3, 3, seed=0)
        graph = SentenceGraph("p", ["alpha", "beta"], [Edge(0, 1, "dep")], "METHOD")
        assert predict(params, graph, tiny_table()) == int(
            np.argmax(forward(params, build_adjacency(graph), np.array([[1.0, -0.5], [0.25, 2.0]])).logits[0])
        )

    def test_all_equal_logits_tie_to_class_zero(self):
        params = ones_params(1, 1, 1, 5)
        adjacency = NormalizedAdjacency(np.array([[1.0]]))
        assert predict_from(params, adjacency, np.array([[1.0]])) == 0

    def test_invariant_under_node_permutation(self):
        rng = np.random.default_rng(21)
        table = tiny_table()
        g1 = SentenceGraph("a", ["alpha", "beta"], [Edge(0, 1, "dep")], "METHOD")
        g2 = SentenceGraph("b", ["beta", "alpha"], [Edge(1, 0, "dep")], "METHOD")
        params = init_params(2, 4, 4, seed=int(rng.integers(1 << 30)))
        assert predict(params, g1, table) == predict(params, g2, table)


class TestCheckpoint:
    def test_round_trip_bitwise(self, tmp_path):
        params = init_params(3, 4, 5, seed=13)
        path = tmp_path / "model.ckpt"
        save_checkpoint(params, path)
        loaded = load_checkpoint(path)
        for name in ("w0", "w1", "wfc"):
            assert getattr(loaded, name).tobytes() == getattr(params, name).tobytes()
        assert (loaded.embed_dim, loaded.hidden1, loaded.hidden2) == (3, 4, 5)
        assert loaded.seed == 13

    def test_truncated_file(self, tmp_path):
        params = init_params(3, 4, 5, seed=0)
        path = tmp_path / "model.ckpt"
        save_checkpoint(params, path)
        path.write_bytes(path.read_bytes()[:-9])
        with pytest.raises(CheckpointError, match="truncated"):
            load_checkpoint(path)

    def test_not_a_checkpoint(self, tmp_path):
        path = tmp_path / "garbage.ckpt"
        path.write_bytes(b"x" * 64)
        with pytest.raises(CheckpointError, match="not a checkpoint"):
            load_checkpoint(path)

    def test_version_mismatch(self, tmp_path):
        params = init_params(2, 2, 2, seed=0)
        path = tmp_path / "model.ckpt"
        save_checkpoint(params, path)
        data = bytearray(path.read_bytes())
        data[8] = 99  # version byte
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="version"):
            load_checkpoint(path)

    def test_inconsistent_payload_length(self, tmp_path):
        params = init_params(2, 2, 2, seed=0)
        path = tmp_path / "model.ckpt"
        save_checkpoint(params, path)
        data = bytearray(path.read_bytes())
        data[36] += 1  # w0 length prefix
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="inconsistent"):
            load_checkpoint(path)

    def test_dimension_mismatch_rejected_at_forward(self, tmp_path):
        params = init_params(3, 4, 4, seed=0)
        path = tmp_path / "model.ckpt"
        save_checkpoint(params, path)
        loaded = load_checkpoint(path)
        adjacency = NormalizedAdjacency(np.array([[1.0]]))
        forward(loaded, adjacency, np.zeros((1, 3)))  # matching d accepted
        with pytest.raises(ShapeError):
            forward(loaded, adjacency, np.zeros((1, 5)))  # mismatched d rejected
