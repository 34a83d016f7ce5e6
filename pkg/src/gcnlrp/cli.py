"""Command-line pipeline: train, eval, explain, perturb.

Exit codes: 0 success, 1 user or data error, 2 internal invariant violation
(a conservation breach). Outputs land only under the configured output
directory; the run seed is logged into every output header.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import RunConfig, load_run_config
from .corpus import (
    LABELS,
    EmbeddingTable,
    LabeledDataset,
    load_dataset,
    read_embeddings_file,
)
from .experiments import (
    curve_pair_to_csv,
    mean_over_nonzero_fractions,
    perturbation_curves,
    perturbation_report,
    weighted_f1,
)
from .linalg import ShapeError
from .model import (
    ModelParams,
    TrainConfig,
    load_checkpoint,
    predict_many,
    save_checkpoint,
    train,
)
from .relevance import ConservationBreachError, explain, trace_to_json
from .render import FigureStyle, emit_dot, emit_latex, emit_svg, normalize_layer, render_index

__all__ = ["main", "cmd_train", "cmd_eval", "cmd_explain", "cmd_perturb"]

_RENDERERS = {"dot": emit_dot, "svg": emit_svg, "tex": emit_latex}


def _load_corpus(config: RunConfig) -> tuple[LabeledDataset, EmbeddingTable]:
    if config.manifest is None:
        raise ValueError("no corpus manifest configured (key 'manifest')")
    if config.embeddings is None:
        raise ValueError("no embeddings path configured (key 'embeddings')")
    if not Path(config.embeddings).exists():
        raise FileNotFoundError(f"embeddings file not found: {config.embeddings}")
    dataset = load_dataset(config.manifest)
    table = read_embeddings_file(config.embeddings, dataset.vocabulary())
    if config.embed_dim is not None and config.embed_dim != table.dimension:
        raise ValueError(
            f"config embed_dim={config.embed_dim} but embeddings have dimension "
            f"{table.dimension}"
        )
    return dataset, table


def _checkpoint_path(config: RunConfig) -> Path:
    return Path(config.checkpoint) if config.checkpoint else Path(config.out_dir) / "model.ckpt"


def _load_params(config: RunConfig, table: EmbeddingTable) -> ModelParams:
    path = _checkpoint_path(config)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    params = load_checkpoint(path)
    if params.embed_dim != table.dimension:
        raise ShapeError(
            f"checkpoint expects {params.embed_dim}-dim features but embeddings "
            f"have dimension {table.dimension}"
        )
    return params


def cmd_train(config: RunConfig) -> int:
    dataset, table = _load_corpus(config)
    result = train(
        dataset,
        table,
        TrainConfig(
            hidden1=config.hidden1,
            hidden2=config.hidden2,
            learning_rate=config.learning_rate,
            beta1=config.beta1,
            beta2=config.beta2,
            epsilon=config.adam_epsilon,
            batch_size=config.batch_size,
            epochs=config.epochs,
            seed=config.seed,
        ),
    )
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint = _checkpoint_path(config)
    checkpoint.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(result.params, checkpoint)
    log_lines = [f"# seed = {config.seed}", "epoch,train_loss,dev_weighted_f1"]
    for stats in result.log:
        log_lines.append(
            f"{stats.epoch},{stats.train_loss:.6f},{stats.dev_weighted_f1:.6f}"
        )
    (out_dir / "training_log.csv").write_text("\n".join(log_lines) + "\n", encoding="utf-8")
    best = result.log[result.best_epoch - 1].dev_weighted_f1 if result.log else float("nan")
    print(f"checkpoint written to {checkpoint}")
    print(f"best dev weighted F1 = {best:.4f} (epoch {result.best_epoch})")
    return 0


def cmd_eval(config: RunConfig) -> int:
    dataset, table = _load_corpus(config)
    params = _load_params(config, table)
    if not dataset.test:
        raise ValueError("empty test split")
    golds = [g.gold_index for g in dataset.test]
    preds = predict_many(params, dataset.test, table)
    f1 = weighted_f1(golds, preds)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [f"# seed = {config.seed}", f"weighted F1 = {f1:.4f}", ""]
    lines.append(f"{'class':<12} {'support':>7} {'precision':>9} {'recall':>6} {'f1':>6}")
    for index, label in enumerate(LABELS):
        tp = sum(1 for g, p in zip(golds, preds) if g == index and p == index)
        fp = sum(1 for g, p in zip(golds, preds) if g != index and p == index)
        fn = sum(1 for g, p in zip(golds, preds) if g == index and p != index)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        class_f1 = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else 0.0
        lines.append(
            f"{label:<12} {tp + fn:>7} {precision:>9.4f} {recall:>6.4f} {class_f1:>6.4f}"
        )
    (out_dir / "eval_report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"weighted F1 = {f1:.4f}")
    return 0


def cmd_explain(config: RunConfig, ids: list[str], explain_all: bool, render: str) -> int:
    dataset, table = _load_corpus(config)
    params = _load_params(config, table)
    by_id = {graph.id: graph for graph in dataset.test}
    if explain_all:
        graphs = list(dataset.test)
    else:
        missing = [i for i in ids if i not in by_id]
        if missing:
            raise ValueError(f"unknown sentence id(s) in test split: {', '.join(missing)}")
        graphs = [by_id[i] for i in ids]
    if not graphs:
        raise ValueError("nothing to explain: give sentence ids or --all")
    backends = [b for b in render.split(",") if b] if render else []
    for backend in backends:
        if backend not in _RENDERERS:
            raise ValueError(f"unknown render backend {backend!r} (choose from dot,svg,tex)")
    trace_dir = Path(config.out_dir) / "traces"
    trace_dir.mkdir(parents=True, exist_ok=True)
    style = FigureStyle(config.arc_base_width, config.arc_width_scale, config.arc_max_width)
    figure_files: list[str] = []
    figure_dir = Path(config.out_dir) / "figures"
    for graph in graphs:
        trace = explain(params, graph, table)
        (trace_dir / f"{graph.id}.json").write_text(
            trace_to_json(trace, seed=config.seed), encoding="utf-8"
        )
        residual = max(trace.conservation_residuals.values())
        print(
            f"{graph.id}: predicted={LABELS[trace.chosen_class]} "
            f"output_relevance={trace.output_relevance:.6f} max_residual={residual:.3e}"
            + (" (degenerate)" if trace.degenerate else "")
        )
        if not trace.conservation_ok(config.conservation_rel_tol, config.conservation_abs_tol):
            raise ConservationBreachError(
                f"trace '{graph.id}': residual {residual:.3e} exceeds tolerance "
                f"{trace.residual_bound(config.conservation_rel_tol, config.conservation_abs_tol):.3e}"
            )
        if backends:
            figure_dir.mkdir(parents=True, exist_ok=True)
            for figure in normalize_layer(trace, graph, style, seed=config.seed):
                for backend in backends:
                    name = f"{graph.id}.{figure.layer}.{backend}"
                    (figure_dir / name).write_text(
                        _RENDERERS[backend](figure), encoding="utf-8"
                    )
                    figure_files.append(name)
    if figure_files:
        (figure_dir / "index.html").write_text(
            render_index(figure_files, seed=config.seed), encoding="utf-8"
        )
    return 0


def cmd_perturb(config: RunConfig) -> int:
    dataset, table = _load_corpus(config)
    params = _load_params(config, table)
    if not dataset.test:
        raise ValueError("empty test split")
    most, least = perturbation_curves(params, dataset.test, table)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_text = f"# seed = {config.seed}\n" + curve_pair_to_csv(most, least)
    (out_dir / "perturbation.csv").write_text(csv_text, encoding="utf-8")
    report = perturbation_report(most, least, seed=config.seed)
    (out_dir / "perturbation_report.txt").write_text(report, encoding="utf-8")
    gap = mean_over_nonzero_fractions(least) - mean_over_nonzero_fractions(most)
    print(f"baseline weighted F1 = {most.points[0][1]:.4f}")
    print(f"AUC gap (least - most) = {gap:.4f}")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", "-c", type=Path, help="key=value config file")
    parser.add_argument("--seed", type=int, help="override the run seed")
    parser.add_argument("--out", type=Path, help="override the output directory")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config key",
    )


def _build_config(args: argparse.Namespace) -> RunConfig:
    overrides: dict[str, str] = {}
    for pair in args.set:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ValueError(f"--set expects KEY=VALUE, got {pair!r}")
        overrides[key.strip()] = value.strip()
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.out is not None:
        overrides["out_dir"] = str(args.out)
    return load_run_config(args.config, overrides)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gcnlrp",
        description="train, evaluate and explain a GCN sentence classifier",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("train", "eval", "perturb"):
        p = sub.add_parser(name)
        _add_common(p)
    p_explain = sub.add_parser("explain")
    _add_common(p_explain)
    p_explain.add_argument("ids", nargs="*", help="test-split sentence ids")
    p_explain.add_argument("--all", action="store_true", help="explain the whole test split")
    p_explain.add_argument(
        "--render", default="", metavar="BACKENDS", help="comma list of dot,svg,tex"
    )
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        config = _build_config(args)
        if args.command == "train":
            return cmd_train(config)
        if args.command == "eval":
            return cmd_eval(config)
        if args.command == "perturb":
            return cmd_perturb(config)
        return cmd_explain(config, args.ids, args.all, args.render)
    except ConservationBreachError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
