"""Acceptance suite: one test per release criterion, at pinned tolerances.

Run with `pytest tests/test_acceptance.py -v -s` to see one pass line per
criterion. Everything trains on the committed fixture corpus (500 parsed
sentences, class-balanced, split 400/50/50) with the default configuration.
"""

import json
import time
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from gcnlrp.cli import main
from gcnlrp.corpus import (
    LABELS,
    Edge,
    LabeledDataset,
    SentenceGraph,
    build_adjacency,
    embed_sentence,
    load_dataset,
    read_embeddings_file,
)
from gcnlrp.experiments import (
    mean_over_nonzero_fractions,
    perturbation_curves,
    weighted_f1,
)
from gcnlrp.linalg import softmax_cross_entropy
from gcnlrp.model import (
    TrainConfig,
    forward,
    forward_batch,
    gradients,
    init_params,
    predict_many,
    train,
)
from gcnlrp.relevance import (
    CONSERVATION_ABS_TOL,
    CONSERVATION_REL_TOL,
    brute_force_lrp_oracle,
    explain,
    lrp_adjacency,
    lrp_linear_zplus,
)
from gcnlrp.render import arc_width, emit_svg, normalize_layer

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
DEFAULT = TrainConfig()  # hidden 96/96, lr 1e-3, batch 32, 30 epochs, seed 7


@pytest.fixture(scope="module")
def corpus():
    dataset = load_dataset(FIXTURES / "corpus" / "manifest.cfg")
    table = read_embeddings_file(FIXTURES / "embeddings.vec", dataset.vocabulary())
    return dataset, table


@pytest.fixture(scope="module")
def trained(corpus):
    dataset, table = corpus
    wfc_minima = []
    started = time.perf_counter()
    result = train(
        dataset, table, DEFAULT, post_step_hook=lambda p: wfc_minima.append(float(p.wfc.min()))
    )
    duration = time.perf_counter() - started
    return result, duration, wfc_minima


def test_conservation_suite(corpus, trained):
    """Every checkpoint and edge accounting on the whole test split conserves
    the starting relevance within relative 1e-6 (+1e-12), in under a minute."""
    dataset, table = corpus
    result, _, _ = trained
    started = time.perf_counter()
    worst = 0.0
    for graph in dataset.test:
        trace = explain(result.params, graph, table)
        bound = trace.residual_bound(CONSERVATION_REL_TOL, CONSERVATION_ABS_TOL)
        for key, residual in trace.conservation_residuals.items():
            assert residual <= bound, (graph.id, key, residual, bound)
            if trace.output_relevance > 0:
                worst = max(worst, residual / trace.output_relevance)
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    print(
        f"\n[PASS] conservation: {len(dataset.test)} graphs x 5 accountings, "
        f"worst relative residual {worst:.2e} (tol 1e-6), {elapsed:.1f}s"
    )


def test_oracle_equivalence():
    """Vectorized redistribution matches the per-neuron oracle to 1e-10
    max-abs on at least 100 random tiny instances."""
    rng = np.random.default_rng(17)
    checked = 0
    worst = 0.0
    for _ in range(60):  # linear layers, negative weights included
        k, m = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        inputs = rng.uniform(0, 2, size=(1, k))
        weights = rng.normal(size=(k, m))
        relevance = rng.uniform(0, 3, size=(1, m))
        diff = np.abs(
            lrp_linear_zplus(inputs, weights, relevance)
            - brute_force_lrp_oracle(inputs, weights, relevance)
        ).max()
        worst = max(worst, diff)
        assert diff < 1e-10
        checked += 1
    for _ in range(60):  # adjacency crossings, channel by channel
        n = int(rng.integers(2, 5))
        edges = [Edge(int(rng.integers(0, d)), d, "dep") for d in range(1, n)]
        adjacency = build_adjacency(SentenceGraph("o", ["w"] * n, edges, "METHOD"))
        inputs = rng.uniform(0, 2, size=(n, 2))
        relevance = rng.uniform(0, 1, size=(n, 2))
        fast, _, _ = lrp_adjacency(adjacency, inputs, relevance)
        slow = np.zeros_like(inputs)
        for c in range(2):
            slow[:, c] = brute_force_lrp_oracle(
                inputs[:, c].reshape(1, -1), adjacency.matrix.T, relevance[:, c].reshape(1, -1)
            )[0]
        diff = np.abs(fast - slow).max()
        worst = max(worst, diff)
        assert diff < 1e-10
        checked += 1
    assert checked >= 100
    print(f"[PASS] oracle equivalence: {checked} instances, worst diff {worst:.2e} (tol 1e-10)")


def test_gradient_check():
    """Analytic gradients match central finite differences (h=1e-5) within
    1e-4 relative on random instances with n<=4, d<=5, f1=f2<=4."""
    rng = np.random.default_rng(23)
    h = 1e-5
    instances = 0
    for _ in range(10):
        n = int(rng.integers(1, 5))
        d = int(rng.integers(2, 6))
        f = int(rng.integers(2, 5))
        edges = [Edge(int(rng.integers(0, dep)), dep, "dep") for dep in range(1, n)]
        adjacency = build_adjacency(SentenceGraph("g", ["w"] * n, edges, "METHOD"))
        h0 = rng.normal(size=(n, d))
        params = init_params(d, f, f, seed=int(rng.integers(1 << 30)))
        gold = int(rng.integers(5))
        _, grads = gradients(params, adjacency, h0, gold)
        for name in ("w0", "w1", "wfc"):
            matrix = getattr(params, name)
            analytic = getattr(grads, name)
            for i in range(matrix.shape[0]):
                for j in range(matrix.shape[1]):
                    saved = matrix[i, j]
                    matrix[i, j] = saved + h
                    up = softmax_cross_entropy(forward(params, adjacency, h0).logits, gold)[0]
                    matrix[i, j] = saved - h
                    down = softmax_cross_entropy(forward(params, adjacency, h0).logits, gold)[0]
                    matrix[i, j] = saved
                    numeric = (up - down) / (2 * h)
                    denom = max(abs(numeric), 1e-4)
                    assert abs(analytic[i, j] - numeric) / denom < 1e-4, (name, i, j)
        instances += 1
    print(f"[PASS] gradient check: {instances} instances vs central differences (tol 1e-4)")


def test_perturbation_faithfulness(corpus, trained):
    """Deleting the most relevant edges first must hurt weighted F1 strictly
    more (mean over fractions 0.1-0.9) than deleting the least relevant
    first; whole experiment incl. training under 10 minutes."""
    dataset, table = corpus
    result, train_duration, _ = trained
    started = time.perf_counter()
    most, least = perturbation_curves(result.params, dataset.test, table)
    elapsed = time.perf_counter() - started
    mean_most = mean_over_nonzero_fractions(most)
    mean_least = mean_over_nonzero_fractions(least)
    assert mean_most < mean_least
    assert most.points[0][1] == least.points[0][1]  # shared baseline at p=0
    assert train_duration + elapsed < 600.0
    print(
        f"[PASS] perturbation faithfulness: mean F1 most-first {mean_most:.3f} < "
        f"least-first {mean_least:.3f} (gap {mean_least - mean_most:+.3f}), "
        f"{train_duration + elapsed:.1f}s total"
    )


def test_training_quality(corpus, trained):
    """Dev weighted F1 reaches 1.5x the majority-class baseline within the
    default epoch budget, and a 10-sentence run is memorized exactly."""
    dataset, table = corpus
    result, _, _ = trained
    counts = {label: 0 for label in LABELS}
    for graph in dataset.train:
        counts[graph.gold_label] += 1
    majority = LABELS.index(max(LABELS, key=lambda label: (counts[label], -LABELS.index(label))))
    baseline = weighted_f1(
        [g.gold_index for g in dataset.dev], [majority] * len(dataset.dev)
    )
    best = max(stats.dev_weighted_f1 for stats in result.log)
    assert best >= 1.5 * baseline
    by_label = {label: [g for g in dataset.train if g.gold_label == label] for label in LABELS}
    ten = [g for label in LABELS for g in by_label[label][:2]]
    overfit_set = LabeledDataset(ten, [], [])
    overfit = train(
        overfit_set,
        table,
        TrainConfig(hidden1=32, hidden2=32, learning_rate=1e-2, batch_size=10, epochs=150, seed=7),
    )
    preds = predict_many(overfit.params, ten, table)
    accuracy = sum(p == g.gold_index for p, g in zip(preds, ten)) / len(ten)
    assert accuracy == 1.0
    print(
        f"[PASS] training quality: dev F1 {best:.3f} >= 1.5 x baseline {baseline:.3f}; "
        f"10-sentence overfit accuracy {accuracy:.1f}"
    )


def test_batching_equivalence(corpus, trained):
    """Block-diagonal batched logits equal single-graph logits within 1e-10
    for every fixture graph."""
    dataset, table = corpus
    result, _, _ = trained
    graphs = dataset.graphs
    worst = 0.0
    for start in range(0, len(graphs), 25):
        chunk = graphs[start : start + 25]
        adjacencies = [build_adjacency(g) for g in chunk]
        features = [embed_sentence(g, table) for g in chunk]
        batch = forward_batch(result.params, adjacencies, features)
        for b, (adjacency, h0) in enumerate(zip(adjacencies, features)):
            single = forward(result.params, adjacency, h0)
            diff = np.abs(batch.logits[b] - single.logits[0]).max()
            worst = max(worst, diff)
            assert diff <= 1e-10, chunk[b].id
    print(
        f"[PASS] batching equivalence: {len(graphs)} graphs, worst logit diff "
        f"{worst:.2e} (tol 1e-10)"
    )


def test_fc_nonnegativity(corpus, trained):
    """The FC weights stay nonnegative after 100% of optimizer steps, and all
    test-split logits are nonnegative in consequence."""
    dataset, table = corpus
    result, _, wfc_minima = trained
    assert wfc_minima, "no optimizer steps observed"
    violations = sum(1 for m in wfc_minima if m < 0.0)
    assert violations == 0
    min_logit = np.inf
    for graph in dataset.test:
        cache = forward(result.params, build_adjacency(graph), embed_sentence(graph, table))
        min_logit = min(min_logit, float(cache.logits.min()))
    assert min_logit >= 0.0
    print(
        f"[PASS] FC nonnegativity: {len(wfc_minima)} steps, 0 violations; "
        f"min test logit {min_logit:.3e} >= 0"
    )


def test_determinism(tmp_path):
    """Two CLI runs of train + explain --all with the same config and seed
    produce byte-identical checkpoints and trace files."""
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        config = tmp_path / f"{run}.cfg"
        config.write_text(
            f"manifest = {FIXTURES / 'corpus' / 'manifest.cfg'}\n"
            f"embeddings = {FIXTURES / 'embeddings.vec'}\n"
            f"out_dir = {out}\n"
            "seed = 7\n",
            encoding="utf-8",
        )
        assert main(["train", "--config", str(config)]) == 0
        assert main(["explain", "--all", "--config", str(config)]) == 0
        outputs.append(out)
    a, b = outputs
    assert (a / "model.ckpt").read_bytes() == (b / "model.ckpt").read_bytes()
    traces_a = sorted((a / "traces").glob("*.json"))
    traces_b = sorted((b / "traces").glob("*.json"))
    assert [t.name for t in traces_a] == [t.name for t in traces_b]
    assert len(traces_a) == 50
    for ta, tb in zip(traces_a, traces_b):
        assert ta.read_bytes() == tb.read_bytes(), ta.name
    print(
        f"[PASS] determinism: checkpoint and {len(traces_a)} trace files "
        "byte-identical across reruns"
    )


def test_renderer_contract(corpus, trained):
    """Every emitted SVG is well-formed XML; per-layer node percentages sum
    to 100 +- 0.01; arc widths stay inside the clamp bounds."""
    dataset, table = corpus
    result, _, _ = trained
    svg_count = 0
    for graph in dataset.test:
        trace = explain(result.params, graph, table)
        for figure in normalize_layer(trace, graph, seed=DEFAULT.seed):
            assert sum(figure.node_percent) == pytest.approx(100.0, abs=0.01)
            if figure.edge_percent is not None:
                for percent in figure.edge_percent.values():
                    width = arc_width(percent, figure.style)
                    assert figure.style.base_width <= width <= figure.style.max_width
            ET.fromstring(emit_svg(figure))
            svg_count += 1
    assert svg_count == 3 * len(dataset.test)
    print(
        f"[PASS] renderer contract: {svg_count} SVGs well-formed, percentages "
        "sum to 100 +- 0.01, widths clamped"
    )
