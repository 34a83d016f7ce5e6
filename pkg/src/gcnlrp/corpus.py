"""Corpus ingestion: CoNLL-U sentence graphs, degree-normalized adjacencies,
and word-embedding lookup.

Edge direction and dependency labels are kept on the graph for display, but
the adjacency operator is built over the undirected, unlabeled edge set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .config import parse_keyvalue

__all__ = [
    "LABELS",
    "LABEL_TO_INDEX",
    "ConlluParseError",
    "EmbeddingFormatError",
    "Edge",
    "SentenceGraph",
    "NormalizedAdjacency",
    "EmbeddingTable",
    "LabeledDataset",
    "parse_conllu",
    "read_conllu_file",
    "build_adjacency",
    "load_embeddings",
    "read_embeddings_file",
    "embed_sentence",
    "load_dataset",
]

LABELS = ("BACKGROUND", "OBJECTIVE", "METHOD", "RESULT", "CONCLUSION")
LABEL_TO_INDEX = {label: index for index, label in enumerate(LABELS)}


class ConlluParseError(ValueError):
    """Malformed CoNLL-U input."""


class EmbeddingFormatError(ValueError):
    """Malformed embedding file."""


class Edge(NamedTuple):
    head: int
    dependent: int
    deplabel: str


@dataclass
class SentenceGraph:
    """One dependency-parsed sentence with its gold class."""

    id: str
    tokens: list[str]
    edges: list[Edge]
    gold_label: str

    def __post_init__(self) -> None:
        n = len(self.tokens)
        if n < 1:
            raise ValueError(f"sentence '{self.id}': no tokens")
        if self.gold_label not in LABELS:
            raise ValueError(f"sentence '{self.id}': unknown label {self.gold_label!r}")
        seen: set[tuple[int, int]] = set()
        for edge in self.edges:
            if not (0 <= edge.head < n and 0 <= edge.dependent < n):
                raise ValueError(f"sentence '{self.id}': edge {edge} out of range (n={n})")
            if edge.head == edge.dependent:
                raise ValueError(f"sentence '{self.id}': self-loop edge at {edge.head}")
            key = (edge.head, edge.dependent)
            if key in seen:
                raise ValueError(f"sentence '{self.id}': duplicate edge {key}")
            seen.add(key)

    @property
    def n(self) -> int:
        return len(self.tokens)

    @property
    def gold_index(self) -> int:
        return LABEL_TO_INDEX[self.gold_label]


@dataclass
class NormalizedAdjacency:
    """Symmetric degree-normalized adjacency with self loops."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"adjacency must be square, got {m.shape}")
        if not np.array_equal(m, m.T):
            raise ValueError("adjacency must be exactly symmetric")
        if (m < 0).any():
            raise ValueError("adjacency entries must be nonnegative")
        if (np.diag(m) <= 0).any():
            raise ValueError("adjacency diagonal must be positive (self loops)")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def parse_conllu(text: str) -> list[SentenceGraph]:
    """Parse CoNLL-U text into sentence graphs.

    Reads FORM (col 2), HEAD (col 7, 1-based; 0 = root, no edge) and DEPREL
    (col 8). Multiword-token ranges and empty nodes are skipped. Each block
    must carry a `# label = CLASS` comment; `# sent_id = ...` names the
    sentence (a positional id is substituted when missing).
    """
    graphs: list[SentenceGraph] = []
    comments: dict[str, str] = {}
    rows: list[tuple[str, int, str, int]] = []  # (form, head, deplabel, line_no)

    def flush() -> None:
        nonlocal comments, rows
        if not comments and not rows:
            return
        sent_id = comments.get("sent_id", f"s{len(graphs) + 1}")
        if "label" not in comments:
            raise ConlluParseError(f"sentence '{sent_id}': missing '# label' comment")
        label = comments["label"]
        if label not in LABELS:
            raise ConlluParseError(f"sentence '{sent_id}': unknown label {label!r}")
        if not rows:
            raise ConlluParseError(f"sentence '{sent_id}': no tokens")
        n = len(rows)
        tokens = [form for form, _, _, _ in rows]
        edges: list[Edge] = []
        for index, (_, head, deplabel, line_no) in enumerate(rows):
            if head == 0:
                continue
            if head > n:
                raise ConlluParseError(
                    f"line {line_no}: head {head} out of range (sentence has {n} tokens)"
                )
            if head - 1 == index:
                raise ConlluParseError(f"line {line_no}: token is its own head")
            edges.append(Edge(head - 1, index, deplabel))
        graphs.append(SentenceGraph(sent_id, tokens, edges, label))
        comments, rows = {}, []

    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep:
                comments[key.strip()] = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluParseError(
                f"line {line_no}: expected 10 tab-separated columns, got {len(cols)}"
            )
        token_id = cols[0]
        if "-" in token_id or "." in token_id:
            continue  # multiword ranges and empty nodes carry no tree structure
        try:
            index = int(token_id)
        except ValueError:
            raise ConlluParseError(f"line {line_no}: bad token id {token_id!r}") from None
        if index != len(rows) + 1:
            raise ConlluParseError(
                f"line {line_no}: token ids must count up from 1, got {index}"
            )
        try:
            head = int(cols[6])
        except ValueError:
            raise ConlluParseError(f"line {line_no}: bad head {cols[6]!r}") from None
        if head < 0:
            raise ConlluParseError(f"line {line_no}: negative head {head}")
        rows.append((cols[1], head, cols[7], line_no))
    flush()
    return graphs


def read_conllu_file(path: Path | str) -> list[SentenceGraph]:
    return parse_conllu(Path(path).read_text(encoding="utf-8"))


def build_adjacency(graph: SentenceGraph) -> NormalizedAdjacency:
    """Degree-normalized adjacency with self loops over the undirected edges.

    A is the binary undirected adjacency, then the operator is
    D^(-1/2) (A+I) D^(-1/2) with D the degree of (A+I). The upper triangle
    is mirrored so the result is bitwise symmetric.
    """
    n = graph.n
    a = np.zeros((n, n))
    for head, dependent, _ in graph.edges:
        a[head, dependent] = 1.0
        a[dependent, head] = 1.0
    a += np.eye(n)
    inv_sqrt = 1.0 / np.sqrt(a.sum(axis=1))
    m = a * inv_sqrt[:, None] * inv_sqrt[None, :]
    m = np.triu(m) + np.triu(m, 1).T
    return NormalizedAdjacency(m)


@dataclass
class EmbeddingTable:
    """Word vectors restricted to a corpus vocabulary, plus box bounds.

    low/high are per-dimension bounds over all retained vectors and the OOV
    vector; they feed the bounded input-layer relevance rule.
    """

    dimension: int
    entries: dict[str, np.ndarray]
    oov_vector: np.ndarray
    low: np.ndarray
    high: np.ndarray

    def lookup(self, token: str) -> np.ndarray:
        """Lowercased lookup first, then the exact form, then OOV."""
        vector = self.entries.get(token.lower())
        if vector is None:
            vector = self.entries.get(token)
        return self.oov_vector if vector is None else vector


def load_embeddings(lines: Iterable[str], vocabulary: Iterable[str]) -> EmbeddingTable:
    """Read fastText-format text vectors, keeping only the given vocabulary.

    Format: header line "count dim", then one "token v1 ... v_dim" row per
    word, whitespace-separated. The OOV vector is zero so absent words can
    never attract relevance.
    """
    wanted = set(vocabulary)
    wanted |= {token.lower() for token in wanted}
    iterator = iter(lines)
    header = next(iterator, None)
    if header is None:
        raise EmbeddingFormatError("line 1: empty embedding file")
    parts = header.split()
    if len(parts) != 2:
        raise EmbeddingFormatError(f"line 1: expected 'count dim' header, got {header!r}")
    try:
        _, dimension = int(parts[0]), int(parts[1])
    except ValueError:
        raise EmbeddingFormatError(f"line 1: non-numeric header {header!r}") from None
    if dimension < 1:
        raise EmbeddingFormatError(f"line 1: dimension must be positive, got {dimension}")
    entries: dict[str, np.ndarray] = {}
    for line_no, line in enumerate(iterator, start=2):
        parts = line.split()
        if not parts:
            continue
        token, values = parts[0], parts[1:]
        if len(values) != dimension:
            raise EmbeddingFormatError(
                f"line {line_no}: expected {dimension} values for {token!r}, got {len(values)}"
            )
        if token not in wanted:
            continue
        try:
            entries[token] = np.array([float(v) for v in values])
        except ValueError:
            raise EmbeddingFormatError(f"line {line_no}: non-numeric value for {token!r}") from None
    oov = np.zeros(dimension)
    stacked = np.vstack([*entries.values(), oov])
    return EmbeddingTable(
        dimension=dimension,
        entries=entries,
        oov_vector=oov,
        low=stacked.min(axis=0),
        high=stacked.max(axis=0),
    )


def read_embeddings_file(path: Path | str, vocabulary: Iterable[str]) -> EmbeddingTable:
    with open(path, encoding="utf-8") as handle:
        return load_embeddings(handle, vocabulary)


def embed_sentence(graph: SentenceGraph, table: EmbeddingTable) -> np.ndarray:
    """Node-feature matrix: row i is the vector of token i."""
    return np.stack([table.lookup(token) for token in graph.tokens])


@dataclass
class LabeledDataset:
    """Train/dev/test sentence graphs with the five fixed classes."""

    train: list[SentenceGraph]
    dev: list[SentenceGraph]
    test: list[SentenceGraph]
    labels: tuple[str, ...] = field(default=LABELS)

    def __post_init__(self) -> None:
        seen: dict[str, str] = {}
        for split_name in ("train", "dev", "test"):
            for graph in getattr(self, split_name):
                if graph.id in seen:
                    raise ValueError(
                        f"sentence id '{graph.id}' appears in both "
                        f"{seen[graph.id]} and {split_name}"
                    )
                seen[graph.id] = split_name

    @property
    def graphs(self) -> list[SentenceGraph]:
        return [*self.train, *self.dev, *self.test]

    def vocabulary(self) -> set[str]:
        return {token for graph in self.graphs for token in graph.tokens}


def load_dataset(manifest_path: Path | str) -> LabeledDataset:
    """Load a dataset from a manifest naming the three split files.

    The manifest is key=value text with keys train, dev and test; paths
    resolve relative to the manifest's directory.
    """
    manifest_path = Path(manifest_path)
    pairs = parse_keyvalue(manifest_path.read_text(encoding="utf-8"))
    for key in ("train", "dev", "test"):
        if key not in pairs:
            raise ValueError(f"manifest {manifest_path}: missing '{key}' entry")
    splits = {
        key: read_conllu_file(manifest_path.parent / pairs[key])
        for key in ("train", "dev", "test")
    }
    return LabeledDataset(splits["train"], splits["dev"], splits["test"])
