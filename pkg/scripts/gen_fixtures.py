#!/usr/bin/env python3
"""Regenerate the committed fixture corpus.

Emits, under fixtures/:
  corpus/{train,dev,test}.conllu   500 parsed sentences, 100 per class
  corpus/manifest.cfg              split manifest for the CLI
  embeddings.vec                   seeded random vectors over the vocabulary
  raw/abstracts.txt                labeled raw abstracts for the preprocessing
                                   pipeline (one sentence per class each)
  run.cfg                          ready-to-use CLI config

Sentences are instantiated from hand-parsed templates, so the dependency
structures are fixed and plausible while the lexical slots vary. Classes
share much of their vocabulary (the same symptom/treatment/group nouns
everywhere, and verbs like "reduced"/"improved"/"assessed" appearing under
different syntactic frames), which pushes the classifier to use the graph
structure rather than isolated keywords.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

import sys

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gcnlrp.corpus import LABELS, Edge, SentenceGraph, parse_conllu
from gcnlrp.render import write_conllu

SYMPTOMS = "pain fatigue anxiety nausea insomnia stiffness headache dizziness weakness cramping".split()
TREATMENTS = "acupuncture massage exercise meditation counseling stretching hydrotherapy yoga physiotherapy relaxation".split()
GROUPS = "adults women men children seniors athletes workers veterans patients nurses".split()
MEASURES = "score scale index questionnaire diary checklist".split()
TIMES = "weeks months days".split()
NUMBERS = "12 24 30 45 60 72 90 120 150 180".split()

POOLS = {
    "symptom": SYMPTOMS,
    "symptom2": SYMPTOMS,
    "treatment": TREATMENTS,
    "treatment2": TREATMENTS,
    "group": GROUPS,
    "measure": MEASURES,
    "time": TIMES,
    "num": NUMBERS,
    "num2": NUMBERS,
}

# One template = [(form-or-{slot}, head 1-based (0 = root), deprel), ...]
TEMPLATES: dict[str, list[list[tuple[str, int, str]]]] = {
    "BACKGROUND": [
        [("{symptom}", 5, "nsubj"), ("is", 5, "cop"), ("a", 5, "det"),
         ("common", 5, "amod"), ("problem", 0, "root"), ("among", 7, "case"),
         ("{group}", 5, "nmod"), (".", 5, "punct")],
        [("Chronic", 2, "amod"), ("{symptom}", 3, "nsubj"), ("affects", 0, "root"),
         ("many", 5, "amod"), ("{group}", 3, "obj"), ("worldwide", 3, "advmod"),
         (".", 3, "punct")],
        [("Evidence", 7, "nsubj"), ("regarding", 3, "case"), ("{treatment}", 1, "nmod"),
         ("for", 5, "case"), ("{symptom}", 3, "nmod"), ("is", 7, "cop"),
         ("limited", 0, "root"), (".", 7, "punct")],
        [("Previous", 2, "amod"), ("studies", 5, "nsubj"), ("of", 4, "case"),
         ("{treatment}", 2, "nmod"), ("reported", 0, "root"),
         ("conflicting", 7, "amod"), ("findings", 5, "obj"), (".", 5, "punct")],
        [("The", 2, "det"), ("burden", 5, "nsubj"), ("of", 4, "case"),
         ("{symptom}", 2, "nmod"), ("remains", 0, "root"), ("high", 5, "xcomp"),
         ("in", 8, "case"), ("{group}", 5, "obl"), (".", 5, "punct")],
        [("{treatment}", 4, "nsubjpass"), ("has", 4, "aux"), ("been", 4, "auxpass"),
         ("proposed", 0, "root"), ("as", 7, "case"), ("a", 7, "det"),
         ("remedy", 4, "obl"), ("for", 9, "case"), ("{symptom}", 7, "nmod"),
         (".", 4, "punct")],
        [("Little", 3, "nsubjpass"), ("is", 3, "auxpass"), ("known", 0, "root"),
         ("about", 6, "case"), ("the", 6, "det"), ("management", 3, "obl"),
         ("of", 8, "case"), ("{symptom}", 6, "nmod"), ("in", 10, "case"),
         ("{group}", 6, "nmod"), (".", 3, "punct")],
        [("Many", 2, "amod"), ("{group}", 3, "nsubj"), ("report", 0, "root"),
         ("{symptom}", 3, "obj"), ("during", 7, "case"), ("routine", 7, "amod"),
         ("care", 3, "obl"), (".", 3, "punct")],
    ],
    "OBJECTIVE": [
        [("We", 2, "nsubj"), ("aimed", 0, "root"), ("to", 4, "mark"),
         ("determine", 2, "xcomp"), ("whether", 7, "mark"), ("{treatment}", 7, "nsubj"),
         ("reduced", 4, "ccomp"), ("{symptom}", 7, "obj"), (".", 2, "punct")],
        [("The", 2, "det"), ("objective", 5, "nsubj"), ("was", 5, "cop"),
         ("to", 5, "mark"), ("compare", 0, "root"), ("{treatment}", 5, "obj"),
         ("with", 8, "case"), ("{treatment2}", 5, "obl"), (".", 5, "punct")],
        [("This", 2, "det"), ("study", 3, "nsubj"), ("assessed", 0, "root"),
         ("whether", 6, "mark"), ("{treatment}", 6, "nsubj"), ("improved", 3, "ccomp"),
         ("{symptom}", 6, "obj"), ("in", 9, "case"), ("{group}", 6, "obl"),
         (".", 3, "punct")],
        [("We", 2, "nsubj"), ("sought", 0, "root"), ("to", 4, "mark"),
         ("evaluate", 2, "xcomp"), ("the", 6, "det"), ("efficacy", 4, "obj"),
         ("of", 8, "case"), ("{treatment}", 6, "nmod"), ("in", 10, "case"),
         ("{group}", 4, "obl"), (".", 2, "punct")],
        [("Our", 2, "nmod:poss"), ("goal", 5, "nsubj"), ("was", 5, "cop"),
         ("to", 5, "mark"), ("examine", 0, "root"), ("whether", 8, "mark"),
         ("{treatment}", 8, "nsubj"), ("relieved", 5, "ccomp"), ("{symptom}", 8, "obj"),
         (".", 5, "punct")],
        [("To", 2, "mark"), ("test", 6, "advcl"), ("{treatment}", 2, "obj"),
         (",", 6, "punct"), ("we", 6, "nsubj"), ("designed", 0, "root"),
         ("a", 9, "det"), ("randomized", 9, "amod"), ("trial", 6, "obj"),
         (".", 6, "punct")],
        [("We", 2, "nsubj"), ("assessed", 0, "root"), ("the", 4, "det"),
         ("effect", 2, "obj"), ("of", 6, "case"), ("{treatment}", 4, "nmod"),
         ("on", 8, "case"), ("{symptom}", 4, "nmod"), (".", 2, "punct")],
        [("The", 2, "det"), ("aim", 5, "nsubj"), ("was", 5, "cop"), ("to", 5, "mark"),
         ("determine", 0, "root"), ("whether", 8, "mark"), ("{symptom}", 8, "nsubj"),
         ("improved", 5, "ccomp"), ("after", 10, "case"), ("{treatment}", 8, "obl"),
         (".", 5, "punct")],
    ],
    "METHOD": [
        [("A", 2, "det"), ("total", 7, "nsubjpass"), ("of", 5, "case"),
         ("{num}", 5, "nummod"), ("{group}", 2, "nmod"), ("were", 7, "auxpass"),
         ("randomized", 0, "root"), (".", 7, "punct")],
        [("{group}", 4, "nsubjpass"), ("were", 4, "auxpass"), ("randomly", 4, "advmod"),
         ("assigned", 0, "root"), ("to", 6, "case"), ("{treatment}", 4, "obl"),
         ("or", 8, "cc"), ("placebo", 6, "conj"), (".", 4, "punct")],
        [("{symptom}", 3, "nsubjpass"), ("was", 3, "auxpass"), ("assessed", 0, "root"),
         ("with", 7, "case"), ("a", 7, "det"), ("validated", 7, "amod"),
         ("{measure}", 3, "obl"), (".", 3, "punct")],
        [("Participants", 2, "nsubj"), ("received", 0, "root"), ("{treatment}", 2, "obj"),
         ("for", 6, "case"), ("{num}", 6, "nummod"), ("{time}", 2, "obl"),
         (".", 2, "punct")],
        [("We", 2, "nsubj"), ("measured", 0, "root"), ("{symptom}", 2, "obj"),
         ("at", 5, "case"), ("baseline", 2, "obl"), ("and", 9, "cc"),
         ("after", 9, "case"), ("{num}", 9, "nummod"), ("{time}", 5, "conj"),
         (".", 2, "punct")],
        [("The", 3, "det"), ("primary", 3, "amod"), ("outcome", 5, "nsubj"),
         ("was", 5, "cop"), ("change", 0, "root"), ("in", 7, "case"),
         ("{symptom}", 5, "nmod"), (".", 5, "punct")],
        [("{group}", 2, "nsubj"), ("completed", 0, "root"), ("a", 5, "det"),
         ("{symptom}", 5, "compound"), ("{measure}", 2, "obj"), ("every", 7, "det"),
         ("week", 2, "obl"), (".", 2, "punct")],
        [("Scores", 3, "nsubjpass"), ("were", 3, "auxpass"), ("recorded", 0, "root"),
         ("by", 6, "case"), ("trained", 6, "amod"), ("{group}", 3, "obl"),
         ("during", 9, "case"), ("each", 9, "det"), ("visit", 3, "obl"),
         (".", 3, "punct")],
    ],
    "RESULT": [
        [("{treatment}", 3, "nsubj"), ("significantly", 3, "advmod"),
         ("reduced", 0, "root"), ("{symptom}", 3, "obj"), ("in", 6, "case"),
         ("{group}", 3, "obl"), (".", 3, "punct")],
        [("Mean", 3, "amod"), ("{symptom}", 3, "compound"), ("scores", 4, "nsubj"),
         ("decreased", 0, "root"), ("by", 7, "case"), ("{num}", 7, "nummod"),
         ("points", 4, "obl"), (".", 4, "punct")],
        [("{symptom}", 2, "nsubj"), ("improved", 0, "root"), ("more", 2, "advmod"),
         ("with", 5, "case"), ("{treatment}", 2, "obl"), ("than", 8, "case"),
         ("with", 8, "case"), ("placebo", 2, "obl"), (".", 2, "punct")],
        [("The", 2, "det"), ("difference", 7, "nsubj"), ("between", 4, "case"),
         ("groups", 2, "nmod"), ("was", 7, "cop"), ("statistically", 7, "advmod"),
         ("significant", 0, "root"), (".", 7, "punct")],
        [("{num}", 5, "nsubj"), ("of", 4, "case"), ("{num2}", 4, "nummod"),
         ("{group}", 1, "nmod"), ("reported", 0, "root"), ("less", 7, "amod"),
         ("{symptom}", 5, "obj"), (".", 5, "punct")],
        [("No", 4, "det"), ("serious", 4, "amod"), ("adverse", 4, "amod"),
         ("events", 6, "nsubjpass"), ("were", 6, "auxpass"), ("observed", 0, "root"),
         (".", 6, "punct")],
        [("Adherence", 5, "nsubj"), ("to", 3, "case"), ("{treatment}", 1, "nmod"),
         ("was", 5, "cop"), ("high", 0, "root"), ("among", 7, "case"),
         ("{group}", 5, "obl"), (".", 5, "punct")],
        [("{treatment}", 2, "nsubj"), ("had", 0, "root"), ("no", 5, "det"),
         ("measurable", 5, "amod"), ("effect", 2, "obj"), ("on", 7, "case"),
         ("{symptom}", 5, "nmod"), (".", 2, "punct")],
    ],
    "CONCLUSION": [
        [("These", 2, "det"), ("findings", 3, "nsubj"), ("suggest", 0, "root"),
         ("that", 6, "mark"), ("{treatment}", 6, "nsubj"), ("relieved", 3, "ccomp"),
         ("{symptom}", 6, "obj"), (".", 3, "punct")],
        [("{treatment}", 2, "nsubj"), ("appears", 0, "root"), ("to", 7, "mark"),
         ("be", 7, "cop"), ("a", 7, "det"), ("safe", 7, "amod"),
         ("option", 2, "xcomp"), ("for", 9, "case"), ("{group}", 7, "nmod"),
         (".", 2, "punct")],
        [("{treatment}", 3, "nsubj"), ("may", 3, "aux"), ("reduce", 0, "root"),
         ("{symptom}", 3, "obj"), ("in", 6, "case"), ("{group}", 3, "obl"),
         (".", 3, "punct")],
        [("Further", 2, "amod"), ("trials", 4, "nsubjpass"), ("are", 4, "auxpass"),
         ("needed", 0, "root"), ("to", 6, "mark"), ("confirm", 4, "xcomp"),
         ("these", 8, "det"), ("results", 6, "obj"), (".", 4, "punct")],
        [("Our", 2, "nmod:poss"), ("results", 3, "nsubj"), ("support", 0, "root"),
         ("the", 5, "det"), ("use", 3, "obj"), ("of", 7, "case"),
         ("{treatment}", 5, "nmod"), ("for", 9, "case"), ("{symptom}", 5, "nmod"),
         (".", 3, "punct")],
        [("In", 2, "case"), ("conclusion", 5, "obl"), (",", 5, "punct"),
         ("{treatment}", 5, "nsubj"), ("offers", 0, "root"), ("modest", 7, "amod"),
         ("benefits", 5, "obj"), ("for", 9, "case"), ("{group}", 7, "nmod"),
         (".", 5, "punct")],
        [("Clinicians", 3, "nsubj"), ("should", 3, "aux"), ("consider", 0, "root"),
         ("{treatment}", 3, "obj"), ("when", 6, "mark"), ("managing", 3, "advcl"),
         ("{symptom}", 6, "obj"), (".", 3, "punct")],
        [("These", 2, "det"), ("results", 3, "nsubj"), ("suggest", 0, "root"),
         ("that", 6, "mark"), ("{symptom}", 6, "nsubj"), ("improved", 3, "ccomp"),
         ("after", 8, "case"), ("{treatment}", 6, "obl"), (".", 3, "punct")],
    ],
}

PER_CLASS = 100
SPLIT_SIZES = {"train": 80, "dev": 10, "test": 10}
EMBED_DIM = 24


def fill_template(template, rng) -> tuple[list[str], list[Edge]]:
    chosen: dict[str, str] = {}
    tokens = []
    for form, _, _ in template:
        if form.startswith("{"):
            slot = form[1:-1]
            if slot not in chosen:
                chosen[slot] = str(rng.choice(POOLS[slot]))
            tokens.append(chosen[slot])
        else:
            tokens.append(form)
    edges = [
        Edge(head - 1, index, deplabel)
        for index, (_, head, deplabel) in enumerate(template)
        if head != 0
    ]
    return tokens, edges


def check_tree(template) -> None:
    n = len(template)
    roots = [i for i, (_, head, _) in enumerate(template) if head == 0]
    assert len(roots) == 1, template
    for i, (_, head, _) in enumerate(template):
        assert 0 <= head <= n and head != i + 1, (template, i)
    # every token must reach the root
    for i in range(n):
        seen = set()
        node = i
        while template[node][1] != 0:
            assert node not in seen, (template, i)
            seen.add(node)
            node = template[node][1] - 1


def generate_class(label: str, rng) -> list[tuple[list[str], list[Edge]]]:
    templates = TEMPLATES[label]
    for template in templates:
        check_tree(template)
    sentences = []
    seen: set[tuple[str, ...]] = set()
    cursor = 0
    attempts = 0
    while len(sentences) < PER_CLASS:
        attempts += 1
        assert attempts < 100 * PER_CLASS, f"cannot fill class {label}"
        template = templates[cursor % len(templates)]
        cursor += 1
        tokens, edges = fill_template(template, rng)
        key = tuple(tokens)
        if key in seen:
            continue
        seen.add(key)
        sentences.append((tokens, edges))
    return sentences


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument(
        "--out", type=Path, default=Path(__file__).resolve().parent.parent / "fixtures"
    )
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    per_class = {label: generate_class(label, rng) for label in LABELS}

    splits: dict[str, list[SentenceGraph]] = {name: [] for name in SPLIT_SIZES}
    for label in LABELS:
        sentences = per_class[label]
        order = rng.permutation(PER_CLASS)
        cursor = 0
        for split_name, size in SPLIT_SIZES.items():
            for k in order[cursor : cursor + size]:
                tokens, edges = sentences[int(k)]
                splits[split_name].append(SentenceGraph("tmp", list(tokens), list(edges), label))
            cursor += size
    # interleave classes inside each split, then assign positional ids
    for split_name, size in SPLIT_SIZES.items():
        graphs = splits[split_name]
        interleaved = []
        for position in range(size):
            for class_index in range(len(LABELS)):
                interleaved.append(graphs[class_index * size + position])
        splits[split_name] = [
            SentenceGraph(f"{split_name}-{i + 1:04d}", g.tokens, g.edges, g.gold_label)
            for i, g in enumerate(interleaved)
        ]

    corpus_dir = args.out / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    vocabulary: set[str] = set()
    for split_name, graphs in splits.items():
        text = write_conllu(graphs)
        (corpus_dir / f"{split_name}.conllu").write_text(text, encoding="utf-8")
        parsed = parse_conllu(text)  # self-check: the primary parser accepts it
        assert len(parsed) == len(graphs)
        for graph in graphs:
            vocabulary |= {token.lower() for token in graph.tokens}
    (corpus_dir / "manifest.cfg").write_text(
        "train = train.conllu\ndev = dev.conllu\ntest = test.conllu\n", encoding="utf-8"
    )

    words = sorted(vocabulary)
    lines = [f"{len(words)} {EMBED_DIM}"]
    for word in words:
        values = rng.uniform(-0.5, 0.5, size=EMBED_DIM)
        lines.append(word + " " + " ".join(f"{v:.6f}" for v in values))
    (args.out / "embeddings.vec").write_text("\n".join(lines) + "\n", encoding="utf-8")

    raw_dir = args.out / "raw"
    raw_dir.mkdir(parents=True, exist_ok=True)
    blocks = []
    for abstract in range(100):
        lines = [f"###{30000 + abstract}"]
        for label in LABELS:
            template = TEMPLATES[label][int(rng.integers(len(TEMPLATES[label])))]
            tokens, _ = fill_template(template, rng)
            lines.append(f"{label}\t{' '.join(tokens)}")
        blocks.append("\n".join(lines))
    (raw_dir / "abstracts.txt").write_text("\n\n".join(blocks) + "\n", encoding="utf-8")

    (args.out / "run.cfg").write_text(
        "manifest = corpus/manifest.cfg\n"
        "embeddings = embeddings.vec\n"
        "out_dir = ../out\n",
        encoding="utf-8",
    )
    total = sum(len(g) for g in splits.values())
    print(f"wrote {total} sentences, vocabulary {len(words)}, seed {args.seed}")


if __name__ == "__main__":
    main()
