"""Figure emission: per-layer dependency arcs with relevance shading.

Node shading is linear in the node's share of the layer's relevance; arc
thickness is linear in the share of relevance an edge carried across the
corresponding adjacency crossing. The top (output) layer draws plain arcs:
no adjacency lies above the final GCN output. Backends: DOT, SVG and a
LaTeX dependency-diagram environment. A CoNLL-U writer lives here too, as
the round-trip partner of the corpus parser.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable
from xml.sax.saxutils import escape

from .corpus import Edge, SentenceGraph
from .relevance import CHECKPOINTS, ConservationBreachError, RelevanceTrace

__all__ = [
    "FigureStyle",
    "LayerFigure",
    "normalize_layer",
    "arc_width",
    "emit_dot",
    "emit_svg",
    "emit_latex",
    "write_conllu",
    "render_index",
]


@dataclass(frozen=True)
class FigureStyle:
    base_width: float = 0.5
    width_scale: float = 5.8
    max_width: float = 3.0


@dataclass
class LayerFigure:
    """One layer's view of a sentence: tokens, arcs, and relevance shares."""

    sentence_id: str
    layer: str  # output | gcn2 | gcn1
    tokens: list[str]
    arcs: list[Edge]
    node_percent: list[float]  # sums to 100 unless the layer total is 0
    edge_percent: dict[tuple[int, int], float] | None  # None: unweighted arcs
    style: FigureStyle = field(default_factory=FigureStyle)
    seed: int | None = None


def _percentages(values, total: float, what: str) -> list[float]:
    if total <= 0.0:
        warnings.warn(f"{what}: zero total relevance, emitting all-zero percentages")
        return [0.0 for _ in values]
    return [100.0 * float(v) / total for v in values]


def normalize_layer(
    trace: RelevanceTrace,
    graph: SentenceGraph,
    style: FigureStyle | None = None,
    seed: int | None = None,
) -> tuple[LayerFigure, LayerFigure, LayerFigure]:
    """Layerwise-normalized figures for the three checkpoints.

    Edge shares are measured against everything that crossed the adjacency
    (edges plus self loops), so they express the fraction of the layer's
    relevance the drawn arc carried.
    """
    if not trace.conservation_ok():
        raise ConservationBreachError(
            f"trace '{trace.sentence_id}': conservation residuals exceed tolerance"
        )
    if trace.sentence_id != graph.id or trace.n != graph.n:
        raise ValueError(
            f"normalize_layer: trace '{trace.sentence_id}' does not match graph '{graph.id}'"
        )
    style = style or FigureStyle()
    figures = []
    for tag in CHECKPOINTS:
        node_rel = trace.node_relevance[tag]
        node_percent = _percentages(
            node_rel, float(node_rel.sum()), f"{graph.id}/{tag} nodes"
        )
        edge_percent = None
        if tag in trace.edge_relevance:
            crossing = trace.edge_relevance[tag]
            total = sum(crossing.values()) + float(trace.self_loop_relevance[tag].sum())
            if total <= 0.0 and crossing:
                warnings.warn(f"{graph.id}/{tag} edges: zero total relevance")
            edge_percent = {
                pair: (100.0 * value / total if total > 0.0 else 0.0)
                for pair, value in crossing.items()
            }
        figures.append(
            LayerFigure(
                sentence_id=graph.id,
                layer=tag,
                tokens=list(graph.tokens),
                arcs=list(graph.edges),
                node_percent=node_percent,
                edge_percent=edge_percent,
                style=style,
                seed=seed,
            )
        )
    return figures[0], figures[1], figures[2]


def arc_width(percent: float, style: FigureStyle) -> float:
    """Linear width map clamped to [base, max]."""
    width = style.base_width + style.width_scale * (percent / 100.0)
    return min(max(width, style.base_width), style.max_width)


def _figure_arc_width(figure: LayerFigure, edge: Edge) -> float:
    if figure.edge_percent is None:
        return figure.style.base_width
    pair = (min(edge.head, edge.dependent), max(edge.head, edge.dependent))
    return arc_width(figure.edge_percent.get(pair, 0.0), figure.style)


def _meta_line(figure: LayerFigure) -> str:
    seed = "none" if figure.seed is None else str(figure.seed)
    return f"sentence_id = {figure.sentence_id}; layer = {figure.layer}; seed = {seed}"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def emit_dot(figure: LayerFigure) -> str:
    """Undirected DOT graph; node saturation and arc penwidth carry shares."""
    lines = [
        f'graph "{_dot_escape(figure.sentence_id)}" {{',
        f"  // {_meta_line(figure)}",
        "  rankdir=LR;",
        '  node [shape=box, style=filled, fontname="Helvetica"];',
    ]
    for i, (token, percent) in enumerate(zip(figure.tokens, figure.node_percent)):
        saturation = min(percent, 100.0) / 100.0
        lines.append(
            f'  n{i} [label="{_dot_escape(token)}\\n({percent:.2f})", '
            f'fillcolor="0.000 {saturation:.3f} 1.000"];'
        )
    for edge in figure.arcs:
        width = _figure_arc_width(figure, edge)
        lines.append(
            f'  n{edge.head} -- n{edge.dependent} '
            f'[label="{_dot_escape(edge.deplabel)}", penwidth={width:.3f}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _svg_text(text: str) -> str:
    return escape(text, {'"': "&quot;"})


def emit_svg(figure: LayerFigure) -> str:
    """Standalone SVG: token boxes in a row, percentage beneath, arcs above."""
    n = len(figure.tokens)
    pitch, margin, arc_unit = 96, 24, 16
    max_span = max((abs(e.head - e.dependent) for e in figure.arcs), default=0)
    top = 18 + arc_unit * max_span
    token_y = top + 24
    percent_y = token_y + 20
    width = 2 * margin + pitch * n
    height = percent_y + 16

    def center(i: int) -> float:
        return margin + pitch * i + pitch / 2.0

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<!-- {_svg_text(_meta_line(figure))} -->",
    ]
    for edge in figure.arcs:
        x1, x2 = center(edge.head), center(edge.dependent)
        span = abs(edge.head - edge.dependent)
        y0 = top + 6
        control_y = y0 - arc_unit * span - 8
        stroke = _figure_arc_width(figure, edge)
        parts.append(
            f'<path d="M {x1:.1f} {y0} Q {(x1 + x2) / 2.0:.1f} {control_y} {x2:.1f} {y0}" '
            f'fill="none" stroke="#b30000" stroke-width="{stroke:.3f}"/>'
        )
        apex_y = 0.25 * y0 + 0.5 * control_y + 0.25 * y0
        parts.append(
            f'<text x="{(x1 + x2) / 2.0:.1f}" y="{apex_y - 3:.1f}" font-size="10" '
            f'text-anchor="middle" fill="#555555">{_svg_text(edge.deplabel)}</text>'
        )
    for i, (token, percent) in enumerate(zip(figure.tokens, figure.node_percent)):
        shade = 255 - round(255 * min(percent, 100.0) / 100.0)
        parts.append(
            f'<rect x="{margin + pitch * i + 4}" y="{top + 8}" width="{pitch - 8}" '
            f'height="24" fill="rgb(255,{shade},{shade})" stroke="#999999"/>'
        )
        parts.append(
            f'<text x="{center(i):.1f}" y="{token_y}" font-size="13" '
            f'text-anchor="middle">{_svg_text(token)}</text>'
        )
        parts.append(
            f'<text x="{center(i):.1f}" y="{percent_y}" font-size="10" '
            f'text-anchor="middle" fill="#333333">({percent:.2f})</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


_LATEX_SPECIALS = {
    "&": r"\textampersand{}",
    "%": r"\%",
    "$": r"\$",
    "#": r"\#",
    "_": r"\_",
    "{": r"\{",
    "}": r"\}",
    "~": r"\textasciitilde{}",
    "^": r"\textasciicircum{}",
    "\\": r"\textbackslash{}",
}


def _latex_escape(text: str) -> str:
    return "".join(_LATEX_SPECIALS.get(ch, ch) for ch in text)


def emit_latex(figure: LayerFigure) -> str:
    """Dependency-diagram environment (tikz-dependency) with shaded cells."""
    cells = [
        f"|[top color=red!{percent:.2f}]|{_latex_escape(token)}"
        for token, percent in zip(figure.tokens, figure.node_percent)
    ]
    values = [f"({percent:.2f})" for percent in figure.node_percent]
    lines = [
        f"% {_meta_line(figure)}",
        r"\begin{dependency}[scale=.7, transform shape]",
        r"\begin{deptext}",
        " \\& ".join(cells) + r"\\",
        " \\& ".join(values) + r"\\",
        r"\end{deptext}",
    ]
    for edge in figure.arcs:
        label = _latex_escape(edge.deplabel)
        if figure.edge_percent is None:
            lines.append(rf"\depedge{{{edge.head + 1}}}{{{edge.dependent + 1}}}{{{label}}}")
        else:
            width = _figure_arc_width(figure, edge)
            lines.append(
                rf"\depedge[line width={width:.3f}pt]"
                rf"{{{edge.head + 1}}}{{{edge.dependent + 1}}}{{{label}}}"
            )
    lines.append(r"\end{dependency}")
    return "\n".join(lines) + "\n"


def write_conllu(graphs: Iterable[SentenceGraph]) -> str:
    """Emit the CoNLL-U subset the corpus parser reads; its round-trip partner.

    Tokens without an incoming edge get HEAD 0. A token with two heads has
    no CoNLL-U representation and is rejected.
    """
    blocks = []
    for graph in graphs:
        head_of: dict[int, int] = {}
        label_of: dict[int, str] = {}
        for edge in graph.edges:
            if edge.dependent in head_of:
                raise ValueError(
                    f"sentence '{graph.id}': token {edge.dependent} has multiple heads"
                )
            head_of[edge.dependent] = edge.head + 1
            label_of[edge.dependent] = edge.deplabel
        lines = [f"# sent_id = {graph.id}", f"# label = {graph.gold_label}"]
        for i, form in enumerate(graph.tokens):
            if "\t" in form or "\n" in form:
                raise ValueError(f"sentence '{graph.id}': token {i} contains tab/newline")
            lines.append(
                "\t".join(
                    [
                        str(i + 1),
                        form,
                        "_",
                        "_",
                        "_",
                        "_",
                        str(head_of.get(i, 0)),
                        label_of.get(i, "root"),
                        "_",
                        "_",
                    ]
                )
            )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def render_index(entries: Iterable[str], seed: int | None = None) -> str:
    """Minimal HTML index of emitted figure files."""
    items = "\n".join(f'    <li><a href="{escape(e)}">{escape(e)}</a></li>' for e in entries)
    seed_note = "" if seed is None else f"\n  <p>seed = {seed}</p>"
    return (
        "<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"/>"
        "<title>relevance figures</title></head>\n<body>\n"
        f"  <h1>relevance figures</h1>{seed_note}\n  <ul>\n{items}\n  </ul>\n"
        "</body>\n</html>\n"
    )
