"""Two-layer GCN sentence classifier with hand-derived gradients.

The propagation rule applies the ReLU before the adjacency mixing,

    H_next = A_norm @ relu(H @ W)

so every quantity that crosses the adjacency is nonnegative, which the
relevance engine relies on. The classifier head is a per-channel global max
pool followed by a bias-free FC layer whose weights are floored at zero
after every optimizer step, keeping all logits nonnegative.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .corpus import (
    LABELS,
    EmbeddingTable,
    LabeledDataset,
    NormalizedAdjacency,
    SentenceGraph,
    build_adjacency,
    embed_sentence,
)
from .linalg import (
    AdamState,
    ShapeError,
    adam_step,
    clamp_nonnegative,
    column_max_with_argmax,
    matmul,
    relu,
    softmax_cross_entropy,
)

__all__ = [
    "CheckpointError",
    "ModelParams",
    "ActivationCache",
    "BatchCache",
    "Gradients",
    "TrainConfig",
    "EpochStats",
    "TrainResult",
    "init_params",
    "forward",
    "forward_batch",
    "gradients",
    "train",
    "predict",
    "predict_from",
    "predict_many",
    "save_checkpoint",
    "load_checkpoint",
]


class CheckpointError(ValueError):
    """Unreadable or inconsistent checkpoint file."""


@dataclass
class ModelParams:
    """The three trainable weight matrices plus architecture hyperparameters."""

    w0: np.ndarray  # embed_dim x hidden1
    w1: np.ndarray  # hidden1 x hidden2
    wfc: np.ndarray  # hidden2 x n_classes
    embed_dim: int
    hidden1: int
    hidden2: int
    n_classes: int
    seed: int

    def __post_init__(self) -> None:
        expected = {
            "w0": (self.embed_dim, self.hidden1),
            "w1": (self.hidden1, self.hidden2),
            "wfc": (self.hidden2, self.n_classes),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise ShapeError(f"params: {name} has shape {actual}, expected {shape}")

    def copy(self) -> "ModelParams":
        return replace(self, w0=self.w0.copy(), w1=self.w1.copy(), wfc=self.wfc.copy())


def init_params(
    embed_dim: int,
    hidden1: int,
    hidden2: int,
    n_classes: int = len(LABELS),
    seed: int = 0,
) -> ModelParams:
    """Glorot-uniform init from a seeded generator; wfc floored at zero so
    logits are nonnegative from the very first forward pass."""
    rng = np.random.default_rng(seed)

    def glorot(fan_in: int, fan_out: int) -> np.ndarray:
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))

    return ModelParams(
        w0=glorot(embed_dim, hidden1),
        w1=glorot(hidden1, hidden2),
        wfc=clamp_nonnegative(glorot(hidden2, n_classes)),
        embed_dim=embed_dim,
        hidden1=hidden1,
        hidden2=hidden2,
        n_classes=n_classes,
        seed=seed,
    )


@dataclass
class ActivationCache:
    """Every intermediate of one forward pass, kept for the backward passes."""

    h0: np.ndarray  # n x d          input features
    z0: np.ndarray  # n x f1         relu(h0 @ w0)
    h1: np.ndarray  # n x f1         adjacency @ z0
    z1: np.ndarray  # n x f2         relu(h1 @ w1)
    h2: np.ndarray  # n x f2         adjacency @ z1
    pooled: np.ndarray  # 1 x f2     per-channel max over nodes
    pool_argmax: np.ndarray  # f2    winning row per channel
    logits: np.ndarray  # 1 x C      pooled @ wfc


def forward(
    params: ModelParams, adjacency: NormalizedAdjacency, h0: np.ndarray
) -> ActivationCache:
    """Single-graph forward pass with all intermediates retained."""
    if h0.shape[1] != params.embed_dim:
        raise ShapeError(
            f"feature projection 1: features have {h0.shape[1]} columns, "
            f"w0 expects {params.embed_dim}"
        )
    if adjacency.n != h0.shape[0]:
        raise ShapeError(
            f"adjacency projection 1: adjacency is {adjacency.n} nodes, "
            f"features have {h0.shape[0]} rows"
        )
    a = adjacency.matrix
    z0 = relu(matmul(h0, params.w0))
    h1 = matmul(a, z0)
    z1 = relu(matmul(h1, params.w1))
    h2 = matmul(a, z1)
    pooled, pool_argmax = column_max_with_argmax(h2)
    logits = matmul(pooled, params.wfc)
    return ActivationCache(h0, z0, h1, z1, h2, pooled, pool_argmax, logits)


@dataclass
class BatchCache:
    """Forward intermediates for a block-diagonal batch of graphs."""

    adjacency: np.ndarray  # N x N block-diagonal
    offsets: list[int]  # row offset per graph, plus final N
    h0: np.ndarray
    z0: np.ndarray
    h1: np.ndarray
    z1: np.ndarray
    h2: np.ndarray
    pooled: np.ndarray  # B x f2
    pool_argmax: np.ndarray  # B x f2, absolute row indices into the stack
    logits: np.ndarray  # B x C


def forward_batch(
    params: ModelParams,
    adjacencies: Sequence[NormalizedAdjacency],
    features: Sequence[np.ndarray],
) -> BatchCache:
    """Batched forward over a block-diagonal adjacency composition.

    Blocks never interact, so per-graph logits match the single-graph
    forward; pooling runs over each diagonal block separately.
    """
    if len(adjacencies) != len(features):
        raise ShapeError(
            f"batch: {len(adjacencies)} adjacencies vs {len(features)} feature matrices"
        )
    if not adjacencies:
        raise ShapeError("batch: empty")
    sizes = [adj.n for adj in adjacencies]
    offsets = [0]
    for size in sizes:
        offsets.append(offsets[-1] + size)
    total = offsets[-1]
    block = np.zeros((total, total))
    for adj, start, end in zip(adjacencies, offsets, offsets[1:]):
        block[start:end, start:end] = adj.matrix
    h0 = np.vstack(list(features))
    z0 = relu(matmul(h0, params.w0))
    h1 = matmul(block, z0)
    z1 = relu(matmul(h1, params.w1))
    h2 = matmul(block, z1)
    pooled = np.empty((len(sizes), params.hidden2))
    pool_argmax = np.empty((len(sizes), params.hidden2), dtype=np.int64)
    for b, (start, end) in enumerate(zip(offsets, offsets[1:])):
        values, rows = column_max_with_argmax(h2[start:end])
        pooled[b] = values[0]
        pool_argmax[b] = rows + start
    logits = matmul(pooled, params.wfc)
    return BatchCache(block, offsets, h0, z0, h1, z1, h2, pooled, pool_argmax, logits)


@dataclass
class Gradients:
    w0: np.ndarray
    w1: np.ndarray
    wfc: np.ndarray


def _backward_batch(
    params: ModelParams, cache: BatchCache, golds: Sequence[int]
) -> tuple[float, Gradients]:
    """Mean cross-entropy over the batch and its analytic gradients."""
    batch_size = len(golds)
    if batch_size != cache.logits.shape[0]:
        raise ShapeError(f"batch: {batch_size} golds vs {cache.logits.shape[0]} logit rows")
    d_logits = np.empty_like(cache.logits)
    total_loss = 0.0
    for b, gold in enumerate(golds):
        loss, grad = softmax_cross_entropy(cache.logits[b : b + 1], gold)
        total_loss += loss
        d_logits[b] = grad[0] / batch_size
    d_wfc = matmul(cache.pooled.T, d_logits)
    d_pooled = matmul(d_logits, params.wfc.T)
    d_h2 = np.zeros_like(cache.h2)
    cols = np.broadcast_to(np.arange(params.hidden2), cache.pool_argmax.shape)
    np.add.at(d_h2, (cache.pool_argmax, cols), d_pooled)
    # adjacency is symmetric, so its transpose is itself
    d_z1 = matmul(cache.adjacency, d_h2)
    d_p1 = d_z1 * (cache.z1 > 0)
    d_w1 = matmul(cache.h1.T, d_p1)
    d_h1 = matmul(d_p1, params.w1.T)
    d_z0 = matmul(cache.adjacency, d_h1)
    d_p0 = d_z0 * (cache.z0 > 0)
    d_w0 = matmul(cache.h0.T, d_p0)
    return total_loss / batch_size, Gradients(d_w0, d_w1, d_wfc)


def gradients(
    params: ModelParams,
    adjacency: NormalizedAdjacency,
    h0: np.ndarray,
    gold: int,
) -> tuple[float, Gradients]:
    """Loss and analytic parameter gradients for a single graph."""
    cache = forward_batch(params, [adjacency], [h0])
    return _backward_batch(params, cache, [gold])


@dataclass
class TrainConfig:
    hidden1: int = 96
    hidden2: int = 96
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    epochs: int = 30
    seed: int = 7


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    dev_weighted_f1: float


@dataclass
class TrainResult:
    params: ModelParams
    log: list[EpochStats]
    best_epoch: int


def train(
    dataset: LabeledDataset,
    table: EmbeddingTable,
    config: TrainConfig,
    post_step_hook: Callable[[ModelParams], None] | None = None,
) -> TrainResult:
    """Adam training over shuffled block-diagonal batches.

    After every optimizer step the FC weights are floored at zero. The
    returned parameters are from the epoch with the best dev weighted F1
    (the final epoch when the dev split is empty). post_step_hook, when
    given, observes the parameters after each completed step.
    """
    from .experiments import weighted_f1  # local import, experiments imports us

    if not dataset.train:
        raise ValueError("train: empty train split")
    params = init_params(
        table.dimension, config.hidden1, config.hidden2, len(LABELS), config.seed
    )
    states = {
        name: AdamState.for_param(
            getattr(params, name),
            learning_rate=config.learning_rate,
            beta1=config.beta1,
            beta2=config.beta2,
            epsilon=config.epsilon,
        )
        for name in ("w0", "w1", "wfc")
    }
    inputs = [
        (build_adjacency(g), embed_sentence(g, table), g.gold_index) for g in dataset.train
    ]
    dev_inputs = [(build_adjacency(g), embed_sentence(g, table)) for g in dataset.dev]
    dev_golds = [g.gold_index for g in dataset.dev]
    rng = np.random.default_rng(config.seed)
    log: list[EpochStats] = []
    best_f1 = -math.inf
    best_epoch = 0
    best_params = params.copy()
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(inputs))
        epoch_loss = 0.0
        for batch_no, start in enumerate(range(0, len(order), config.batch_size)):
            chosen = order[start : start + config.batch_size]
            adjacencies = [inputs[i][0] for i in chosen]
            features = [inputs[i][1] for i in chosen]
            golds = [inputs[i][2] for i in chosen]
            cache = forward_batch(params, adjacencies, features)
            loss, grads = _backward_batch(params, cache, golds)
            if not math.isfinite(loss):
                raise RuntimeError(f"non-finite loss at epoch {epoch}, batch {batch_no}")
            params.w0 = adam_step(params.w0, grads.w0, states["w0"])
            params.w1 = adam_step(params.w1, grads.w1, states["w1"])
            params.wfc = clamp_nonnegative(adam_step(params.wfc, grads.wfc, states["wfc"]))
            if post_step_hook is not None:
                post_step_hook(params)
            epoch_loss += loss * len(chosen)
        train_loss = epoch_loss / len(inputs)
        if dev_inputs:
            dev_preds = [
                int(np.argmax(forward(params, adj, h0).logits[0])) for adj, h0 in dev_inputs
            ]
            dev_f1 = weighted_f1(dev_golds, dev_preds)
        else:
            dev_f1 = float("nan")
        log.append(EpochStats(epoch, train_loss, dev_f1))
        if (dev_inputs and dev_f1 > best_f1) or not dev_inputs:
            best_f1 = dev_f1 if dev_inputs else best_f1
            best_epoch = epoch
            best_params = params.copy()
    return TrainResult(best_params, log, best_epoch)


def predict_from(
    params: ModelParams, adjacency: NormalizedAdjacency, h0: np.ndarray
) -> int:
    """Argmax class; ties break to the lowest class index."""
    return int(np.argmax(forward(params, adjacency, h0).logits[0]))


def predict(params: ModelParams, graph: SentenceGraph, table: EmbeddingTable) -> int:
    return predict_from(params, build_adjacency(graph), embed_sentence(graph, table))


def predict_many(
    params: ModelParams, graphs: Sequence[SentenceGraph], table: EmbeddingTable
) -> list[int]:
    return [predict(params, graph, table) for graph in graphs]


CHECKPOINT_MAGIC = b"GCNLRPCK"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<8sIIIIIq")  # magic, version, d, f1, f2, C, seed


def save_checkpoint(params: ModelParams, path: Path | str) -> None:
    """Versioned binary container: header, then the three matrices as
    length-prefixed little-endian float64 arrays, row-major."""
    chunks = [
        _HEADER.pack(
            CHECKPOINT_MAGIC,
            CHECKPOINT_VERSION,
            params.embed_dim,
            params.hidden1,
            params.hidden2,
            params.n_classes,
            params.seed,
        )
    ]
    for name in ("w0", "w1", "wfc"):
        matrix = getattr(params, name)
        chunks.append(struct.pack("<Q", matrix.size))
        chunks.append(np.ascontiguousarray(matrix, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(chunks))


def load_checkpoint(path: Path | str) -> ModelParams:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise CheckpointError(f"{path}: truncated checkpoint (no header)")
    magic, version, d, f1, f2, c, seed = _HEADER.unpack_from(data, 0)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported checkpoint version {version} (expected {CHECKPOINT_VERSION})"
        )
    offset = _HEADER.size
    shapes = {"w0": (d, f1), "w1": (f1, f2), "wfc": (f2, c)}
    matrices: dict[str, np.ndarray] = {}
    for name, (rows, cols) in shapes.items():
        if offset + 8 > len(data):
            raise CheckpointError(f"{path}: truncated checkpoint (missing {name} length)")
        (count,) = struct.unpack_from("<Q", data, offset)
        offset += 8
        if count != rows * cols:
            raise CheckpointError(
                f"{path}: dimension header inconsistent with payload length for {name} "
                f"({count} values, expected {rows * cols})"
            )
        end = offset + 8 * count
        if end > len(data):
            raise CheckpointError(f"{path}: truncated checkpoint (short {name} payload)")
        matrices[name] = (
            np.frombuffer(data, dtype="<f8", count=count, offset=offset)
            .reshape(rows, cols)
            .copy()
        )
        offset = end
    if offset != len(data):
        raise CheckpointError(f"{path}: {len(data) - offset} trailing bytes")
    return ModelParams(
        w0=matrices["w0"],
        w1=matrices["w1"],
        wfc=matrices["wfc"],
        embed_dim=d,
        hidden1=f1,
        hidden2=f2,
        n_classes=c,
        seed=seed,
    )
