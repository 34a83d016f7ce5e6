"""Perturbation validation and evaluation metrics.

Edges are ranked per graph by their relevance summed over both adjacency
crossings; deleting the top-ranked edges first should hurt classification
faster than deleting the bottom-ranked ones if the traced relevance really
marks what the model uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import (
    Edge,
    EmbeddingTable,
    NormalizedAdjacency,
    SentenceGraph,
    build_adjacency,
    embed_sentence,
)
from .model import ModelParams, predict_from
from .relevance import CROSSINGS, RelevanceTrace, explain

__all__ = [
    "DEFAULT_FRACTIONS",
    "EdgeRanking",
    "PerturbationCurve",
    "weighted_f1",
    "rank_edges",
    "delete_edges",
    "perturb_eval",
    "perturbation_curves",
    "curve_pair_to_csv",
    "perturbation_report",
    "mean_over_nonzero_fractions",
]

DEFAULT_FRACTIONS = tuple(i / 10 for i in range(10))


def weighted_f1(gold: Sequence[int], predicted: Sequence[int]) -> float:
    """Per-class F1 averaged with gold-support weights.

    Classes absent from the gold labels contribute F1 = 0 at weight 0,
    i.e. nothing.
    """
    if len(gold) != len(predicted):
        raise ValueError(f"weighted_f1: {len(gold)} gold vs {len(predicted)} predictions")
    if not gold:
        raise ValueError("weighted_f1: empty input")
    total = len(gold)
    score = 0.0
    for cls in sorted(set(gold)):
        tp = sum(1 for g, p in zip(gold, predicted) if g == cls and p == cls)
        fp = sum(1 for g, p in zip(gold, predicted) if g != cls and p == cls)
        fn = sum(1 for g, p in zip(gold, predicted) if g == cls and p != cls)
        f1 = 2.0 * tp / (2.0 * tp + fp + fn) if (2 * tp + fp + fn) else 0.0
        support = tp + fn
        score += (support / total) * f1
    return score


@dataclass
class EdgeRanking:
    """A graph's edges sorted by descending global relevance."""

    sentence_id: str
    ranked: list[tuple[Edge, float]]

    @property
    def edges(self) -> list[Edge]:
        return [edge for edge, _ in self.ranked]


def rank_edges(trace: RelevanceTrace, graph: SentenceGraph) -> EdgeRanking:
    """Sort the graph's edges by relevance summed across both crossings.

    Ties (including edges absent from the relevance maps, which score 0)
    break lexicographically on the undirected (i, j) pair.
    """
    if trace.sentence_id != graph.id or trace.n != graph.n:
        raise ValueError(
            f"rank_edges: trace for '{trace.sentence_id}' (n={trace.n}) does not match "
            f"graph '{graph.id}' (n={graph.n})"
        )
    totals: dict[tuple[int, int], float] = {}
    for tag in CROSSINGS:
        for pair, value in trace.edge_relevance[tag].items():
            totals[pair] = totals.get(pair, 0.0) + value
    scored = []
    for edge in graph.edges:
        pair = (min(edge.head, edge.dependent), max(edge.head, edge.dependent))
        scored.append((edge, totals.get(pair, 0.0)))
    scored.sort(
        key=lambda item: (
            -item[1],
            min(item[0].head, item[0].dependent),
            max(item[0].head, item[0].dependent),
            item[0].head,
        )
    )
    return EdgeRanking(graph.id, scored)


@dataclass
class PerturbationCurve:
    ordering: str  # "most" or "least"
    points: list[tuple[float, float]]  # (deletion fraction, weighted F1)


def _deletion_count(fraction: float, n_edges: int) -> int:
    # ceil with a small slack so 0.3 * 10 == 3.0000000000000004 still gives 3
    return max(0, min(n_edges, math.ceil(fraction * n_edges - 1e-9)))


def delete_edges(adjacency: NormalizedAdjacency, doomed: Sequence[Edge]) -> NormalizedAdjacency:
    """Zero the deleted edges' entries, keeping everything else untouched.

    The surviving entries (self loops included) retain the weights the model
    was trained with, so deletion removes exactly the message passing over
    the doomed edges and nothing more. Recomputing the degree normalization
    instead would re-weight the surviving paths as well, which confounds the
    faithfulness measurement with a calibration shift.
    """
    matrix = adjacency.matrix.copy()
    for edge in doomed:
        matrix[edge.head, edge.dependent] = 0.0
        matrix[edge.dependent, edge.head] = 0.0
    return NormalizedAdjacency(matrix)


def _perturbed_prediction(
    params: ModelParams,
    adjacency: NormalizedAdjacency,
    ranking: EdgeRanking,
    h0: np.ndarray,
    fraction: float,
    ordering: str,
) -> int:
    count = _deletion_count(fraction, len(ranking.ranked))
    if count == 0:
        doomed: list[Edge] = []
    elif ordering == "most":
        doomed = ranking.edges[:count]
    else:
        doomed = ranking.edges[-count:]
    return predict_from(params, delete_edges(adjacency, doomed), h0)


def _prepare(params, graphs, table):
    prepared = []
    for graph in graphs:
        ranking = rank_edges(explain(params, graph, table), graph)
        prepared.append((build_adjacency(graph), ranking, embed_sentence(graph, table)))
    return prepared


def perturb_eval(
    params: ModelParams,
    graphs: Sequence[SentenceGraph],
    table: EmbeddingTable,
    fractions: Sequence[float] = DEFAULT_FRACTIONS,
    ordering: str = "most",
) -> PerturbationCurve:
    """Delete a growing per-graph share of ranked edges and track weighted F1.

    Each graph deletes from its own ranking head ("most") or tail ("least");
    deleted edges are zeroed out of the trained adjacency (see delete_edges),
    self loops always survive, so every graph stays classifiable.
    """
    if ordering not in ("most", "least"):
        raise ValueError(f"perturb_eval: unknown ordering {ordering!r}")
    prepared = _prepare(params, graphs, table)
    golds = [graph.gold_index for graph in graphs]
    points = []
    for fraction in fractions:
        preds = [
            _perturbed_prediction(params, adjacency, ranking, h0, fraction, ordering)
            for adjacency, ranking, h0 in prepared
        ]
        points.append((fraction, weighted_f1(golds, preds)))
    return PerturbationCurve(ordering, points)


def perturbation_curves(
    params: ModelParams,
    graphs: Sequence[SentenceGraph],
    table: EmbeddingTable,
    fractions: Sequence[float] = DEFAULT_FRACTIONS,
) -> tuple[PerturbationCurve, PerturbationCurve]:
    """Both orderings over shared traces (each graph explained once)."""
    prepared = _prepare(params, graphs, table)
    golds = [graph.gold_index for graph in graphs]
    curves = {}
    for ordering in ("most", "least"):
        points = []
        for fraction in fractions:
            preds = [
                _perturbed_prediction(params, adjacency, ranking, h0, fraction, ordering)
                for adjacency, ranking, h0 in prepared
            ]
            points.append((fraction, weighted_f1(golds, preds)))
        curves[ordering] = PerturbationCurve(ordering, points)
    return curves["most"], curves["least"]


def curve_pair_to_csv(most: PerturbationCurve, least: PerturbationCurve) -> str:
    """Fixed 6-decimal CSV: fraction, f1 for most-first, f1 for least-first."""
    if [p[0] for p in most.points] != [p[0] for p in least.points]:
        raise ValueError("curve_pair_to_csv: fraction grids differ")
    lines = ["fraction,f1_most,f1_least"]
    for (fraction, f1_most), (_, f1_least) in zip(most.points, least.points):
        lines.append(f"{fraction:.6f},{f1_most:.6f},{f1_least:.6f}")
    return "\n".join(lines) + "\n"


def mean_over_nonzero_fractions(curve: PerturbationCurve) -> float:
    values = [f1 for fraction, f1 in curve.points if fraction > 0.0]
    if not values:
        raise ValueError("curve has no nonzero fractions")
    return sum(values) / len(values)


def perturbation_report(
    most: PerturbationCurve, least: PerturbationCurve, seed: int | None = None
) -> str:
    """Human-readable summary: baseline, per-fraction table, AUC gap."""
    baseline = most.points[0][1] if most.points and most.points[0][0] == 0.0 else float("nan")
    auc_most = mean_over_nonzero_fractions(most)
    auc_least = mean_over_nonzero_fractions(least)
    lines = ["perturbation experiment"]
    if seed is not None:
        lines.append(f"seed = {seed}")
    lines += [
        f"baseline weighted F1 (no deletion) = {baseline:.6f}",
        "",
        "fraction  f1_most   f1_least",
    ]
    for (fraction, f1_most), (_, f1_least) in zip(most.points, least.points):
        lines.append(f"{fraction:8.1f}  {f1_most:.6f}  {f1_least:.6f}")
    lines += [
        "",
        f"mean F1 over nonzero fractions, most-first  = {auc_most:.6f}",
        f"mean F1 over nonzero fractions, least-first = {auc_least:.6f}",
        f"AUC gap (least - most) = {auc_least - auc_most:.6f}",
    ]
    return "\n".join(lines) + "\n"
