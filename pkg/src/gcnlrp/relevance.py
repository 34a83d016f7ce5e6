"""Relevance backpropagation through the classifier, with per-edge tracing.

Starting from the maximal logit, relevance is redistributed backwards
through the FC head, the max pool, and both GCN layers. Each GCN layer is
treated as two stacked linear sublayers: the adjacency projection (the
normalized adjacency acting as an FC weight matrix) and the feature
projection. For nonnegative inputs the positive-contribution rule applies:

    R_i = sum_j  h_i * max(w_ij, 0) / (sum_k h_k * max(w_kj, 0) + eps) * R_j

Crossing an adjacency redistributes relevance over graph neighborhoods; the
mass moving between two distinct nodes is recorded as that edge's relevance
for the crossing, and mass a node keeps is its self-loop relevance. The
input layer holds real-valued word vectors, so the bounded (box-constraint)
variant of the rule is used there with per-dimension bounds taken from the
embedding table.

Every redistribution conserves relevance up to the epsilon stabilizer; the
residual against the starting logit value is recorded per checkpoint.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .corpus import (
    LABELS,
    EmbeddingTable,
    NormalizedAdjacency,
    SentenceGraph,
    build_adjacency,
    embed_sentence,
)
from .linalg import ShapeError
from .model import ActivationCache, ModelParams, forward

__all__ = [
    "EPS_STABILIZER",
    "CONSERVATION_REL_TOL",
    "CONSERVATION_ABS_TOL",
    "CHECKPOINTS",
    "CROSSINGS",
    "ContractViolationError",
    "ConservationBreachError",
    "OutputRelevance",
    "RelevanceTrace",
    "lrp_linear_zplus",
    "lrp_output_layer",
    "lrp_maxpool",
    "lrp_adjacency",
    "lrp_input_zb",
    "explain",
    "brute_force_lrp_oracle",
    "trace_to_json",
]

EPS_STABILIZER = 1e-9
CONSERVATION_REL_TOL = 1e-6
CONSERVATION_ABS_TOL = 1e-12

# Checkpoint order follows the backward pass: relevance right after the max
# pool ("output"), after the layer-2 feature projection ("gcn2"), and after
# the input-space feature projection ("gcn1").
CHECKPOINTS = ("output", "gcn2", "gcn1")
CROSSINGS = ("gcn2", "gcn1")


class ContractViolationError(ValueError):
    """Inputs outside the domain a relevance rule is valid on."""


class ConservationBreachError(RuntimeError):
    """A trace whose conservation residuals exceed tolerance."""


def _require_nonnegative(op: str, inputs: np.ndarray) -> None:
    if (inputs < 0).any():
        raise ContractViolationError(f"{op}: inputs must be nonnegative")


def lrp_linear_zplus(
    inputs: np.ndarray,
    weights: np.ndarray,
    relevance: np.ndarray,
    epsilon: float = EPS_STABILIZER,
) -> np.ndarray:
    """Positive-contribution rule through one linear layer, row-wise.

    inputs is n x k (every row an independent application), weights k x m,
    relevance n x m. Negative weights are excluded by w+ = max(0, w);
    columns whose stabilized denominator is zero distribute nothing.
    """
    _require_nonnegative("lrp_linear_zplus", inputs)
    if inputs.shape[1] != weights.shape[0] or relevance.shape != (
        inputs.shape[0],
        weights.shape[1],
    ):
        raise ShapeError(
            f"lrp_linear_zplus: inputs {inputs.shape}, weights {weights.shape}, "
            f"relevance {relevance.shape}"
        )
    w_plus = np.maximum(weights, 0.0)
    denom = inputs @ w_plus + epsilon
    share = relevance / denom
    return inputs * (share @ w_plus.T)


class OutputRelevance(NamedTuple):
    output_relevance: float
    chosen_class: int
    pooled_relevance: np.ndarray  # 1 x f2
    degenerate: bool


def lrp_output_layer(cache: ActivationCache, params: ModelParams) -> OutputRelevance:
    """Start relevance at the maximal raw logit and push it through the FC head.

    A graph whose logits are all zero yields an all-zero, degenerate result
    rather than an error.
    """
    chosen = int(np.argmax(cache.logits[0]))
    value = float(cache.logits[0, chosen])
    if value <= 0.0:
        return OutputRelevance(0.0, chosen, np.zeros_like(cache.pooled), True)
    seed = np.zeros_like(cache.logits)
    seed[0, chosen] = value
    pooled_relevance = lrp_linear_zplus(cache.pooled, params.wfc, seed)
    return OutputRelevance(value, chosen, pooled_relevance, False)


def lrp_maxpool(
    pooled_relevance: np.ndarray, pool_argmax: np.ndarray, n: int
) -> np.ndarray:
    """Winner-take-all unpooling: each channel's relevance goes to the row
    that won the max; routing conserves relevance exactly."""
    if pool_argmax.size and int(pool_argmax.max()) >= n:
        raise ShapeError(f"lrp_maxpool: argmax row {int(pool_argmax.max())} >= n={n}")
    channels = pooled_relevance.shape[1]
    out = np.zeros((n, channels))
    out[pool_argmax, np.arange(channels)] = pooled_relevance[0]
    return out


def lrp_adjacency(
    adjacency: NormalizedAdjacency,
    inputs: np.ndarray,
    output_relevance: np.ndarray,
    epsilon: float = EPS_STABILIZER,
) -> tuple[np.ndarray, dict[tuple[int, int], float], np.ndarray]:
    """Redistribute relevance through the adjacency projection.

    The adjacency acts as an FC layer per channel: output row j receives
    sum_i A[j,i] * inputs[i], so node j's relevance flows back to node i in
    proportion to A[j,i] * inputs[i]. Returns

      input_relevance n x f,
      edge relevance {(i, j) -> mass} over undirected edges i < j (both
        directed messages summed, self loops excluded),
      self-loop relevance per node.
    """
    _require_nonnegative("lrp_adjacency", inputs)
    a = adjacency.matrix
    if a.shape[0] != inputs.shape[0] or inputs.shape != output_relevance.shape:
        raise ShapeError(
            f"lrp_adjacency: adjacency {a.shape}, inputs {inputs.shape}, "
            f"relevance {output_relevance.shape}"
        )
    denom = a @ inputs + epsilon
    share = output_relevance / denom  # n x f, per output row j and channel
    input_relevance = inputs * (a.T @ share)
    # directed[i, j] = total mass flowing from output node j back to input i
    directed = a.T * (inputs @ share.T)
    upper_i, upper_j = np.nonzero(np.triu(a, 1))
    edge_relevance = {
        (int(i), int(j)): float(directed[i, j] + directed[j, i])
        for i, j in zip(upper_i, upper_j)
    }
    self_loop = np.diag(directed).copy()
    return input_relevance, edge_relevance, self_loop


def lrp_input_zb(
    h0: np.ndarray,
    w0: np.ndarray,
    output_relevance: np.ndarray,
    low: np.ndarray,
    high: np.ndarray,
    epsilon: float = EPS_STABILIZER,
) -> np.ndarray:
    """Bounded-input rule for the first feature projection.

    Word vectors may be negative, so contributions are measured against the
    per-dimension box [low, high] containing every input:

        numerator_ij = x_i w_ij - low_i w+_ij - high_i w-_ij

    which is nonnegative whenever low <= x <= high. Computed in the
    cancellation-free split form (x-low)*w+ + (x-high)*w- so nonnegativity
    survives floating point.
    """
    if (h0 < low[None, :]).any() or (h0 > high[None, :]).any():
        raise ContractViolationError("lrp_input_zb: input outside declared bounds")
    if h0.shape[1] != w0.shape[0] or output_relevance.shape != (h0.shape[0], w0.shape[1]):
        raise ShapeError(
            f"lrp_input_zb: inputs {h0.shape}, weights {w0.shape}, "
            f"relevance {output_relevance.shape}"
        )
    w_plus = np.maximum(w0, 0.0)
    w_minus = np.minimum(w0, 0.0)
    above_low = h0 - low[None, :]
    below_high = h0 - high[None, :]
    denom = above_low @ w_plus + below_high @ w_minus
    denom = denom + np.where(denom >= 0.0, epsilon, -epsilon)
    share = output_relevance / denom
    return above_low * (share @ w_plus.T) + below_high * (share @ w_minus.T)


@dataclass
class RelevanceTrace:
    """Everything the backward pass produced for one sentence.

    maps holds the three contribution-map checkpoints ("output" n x f2,
    "gcn2" n x f1, "gcn1" n x d); node_relevance their row sums;
    edge_relevance and self_loop_relevance one entry per adjacency crossing;
    conservation_residuals the absolute deviation of each checkpoint sum
    (and each edge accounting) from the starting relevance.
    """

    sentence_id: str
    chosen_class: int
    output_relevance: float
    degenerate: bool
    maps: dict[str, np.ndarray]
    node_relevance: dict[str, np.ndarray]
    edge_relevance: dict[str, dict[tuple[int, int], float]]
    self_loop_relevance: dict[str, np.ndarray]
    conservation_residuals: dict[str, float]

    @property
    def n(self) -> int:
        return self.maps["output"].shape[0]

    def residual_bound(
        self,
        rel_tol: float = CONSERVATION_REL_TOL,
        abs_tol: float = CONSERVATION_ABS_TOL,
    ) -> float:
        return rel_tol * abs(self.output_relevance) + abs_tol

    def conservation_ok(
        self,
        rel_tol: float = CONSERVATION_REL_TOL,
        abs_tol: float = CONSERVATION_ABS_TOL,
    ) -> bool:
        bound = self.residual_bound(rel_tol, abs_tol)
        return all(residual <= bound for residual in self.conservation_residuals.values())


def explain(
    params: ModelParams,
    graph: SentenceGraph,
    table: EmbeddingTable,
    epsilon: float = EPS_STABILIZER,
) -> RelevanceTrace:
    """Forward with caching, then the full relevance backward pass."""
    adjacency = build_adjacency(graph)
    h0 = embed_sentence(graph, table)
    cache = forward(params, adjacency, h0)
    out = lrp_output_layer(cache, params)
    m2 = lrp_maxpool(out.pooled_relevance, cache.pool_argmax, graph.n)
    r_z1, edges_2, loops_2 = lrp_adjacency(adjacency, cache.z1, m2, epsilon)
    m1 = lrp_linear_zplus(cache.h1, params.w1, r_z1, epsilon)
    r_z0, edges_1, loops_1 = lrp_adjacency(adjacency, cache.z0, m1, epsilon)
    m0 = lrp_input_zb(h0, params.w0, r_z0, table.low, table.high, epsilon)
    maps = {"output": m2, "gcn2": m1, "gcn1": m0}
    edge_relevance = {"gcn2": edges_2, "gcn1": edges_1}
    self_loops = {"gcn2": loops_2, "gcn1": loops_1}
    start = out.output_relevance
    residuals = {tag: float(abs(maps[tag].sum() - start)) for tag in CHECKPOINTS}
    for tag in CROSSINGS:
        accounted = sum(edge_relevance[tag].values()) + float(self_loops[tag].sum())
        residuals[f"edges_{tag}"] = abs(accounted - start)
    return RelevanceTrace(
        sentence_id=graph.id,
        chosen_class=out.chosen_class,
        output_relevance=start,
        degenerate=out.degenerate,
        maps=maps,
        node_relevance={tag: maps[tag].sum(axis=1) for tag in CHECKPOINTS},
        edge_relevance=edge_relevance,
        self_loop_relevance=self_loops,
        conservation_residuals=residuals,
    )


def brute_force_lrp_oracle(
    inputs: np.ndarray,
    weights: np.ndarray,
    relevance: np.ndarray,
    epsilon: float = EPS_STABILIZER,
) -> np.ndarray:
    """Per-neuron enumeration of the positive-contribution rule.

    Deliberately unvectorized; the independent reference the fast path is
    tested against. Capped at 64 total neurons.
    """
    _require_nonnegative("brute_force_lrp_oracle", inputs)
    rows, k = inputs.shape
    m = weights.shape[1]
    if inputs.size + relevance.size > 64:
        raise ValueError(
            f"oracle size cap exceeded: {inputs.size + relevance.size} neurons > 64"
        )
    out = np.zeros((rows, k))
    for r in range(rows):
        for j in range(m):
            denom = 0.0
            for i in range(k):
                denom += inputs[r, i] * max(weights[i, j], 0.0)
            denom += epsilon
            for i in range(k):
                out[r, i] += inputs[r, i] * max(weights[i, j], 0.0) / denom * relevance[r, j]
    return out


def trace_to_json(trace: RelevanceTrace, seed: int | None = None) -> str:
    """Serialize a trace to its documented JSON form (see README).

    Deterministic: keys sorted, edges sorted by (i, j), floats via repr.
    """
    document = {
        "format": "gcnlrp-trace",
        "format_version": 1,
        "seed": seed,
        "sentence_id": trace.sentence_id,
        "chosen_class": trace.chosen_class,
        "chosen_label": LABELS[trace.chosen_class],
        "output_relevance": trace.output_relevance,
        "degenerate": trace.degenerate,
        "node_relevance": {
            tag: [float(v) for v in trace.node_relevance[tag]] for tag in CHECKPOINTS
        },
        "edge_relevance": {
            tag: [
                [i, j, value]
                for (i, j), value in sorted(trace.edge_relevance[tag].items())
            ]
            for tag in CROSSINGS
        },
        "self_loop_relevance": {
            tag: [float(v) for v in trace.self_loop_relevance[tag]] for tag in CROSSINGS
        },
        "conservation_residuals": {
            key: float(value) for key, value in sorted(trace.conservation_residuals.items())
        },
    }
    return json.dumps(document, indent=2, sort_keys=True) + "\n"
