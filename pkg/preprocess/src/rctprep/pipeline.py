"""The two offline jobs: full preprocessing and fixture sampling."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

from .conllu import sentence_block, write_document
from .parser import parse
from .rct import LABELS, LabeledSentence, read_rct
from .tokenizer import tokenize

logger = logging.getLogger("rctprep")


@dataclass
class PreprocessSummary:
    sentences_written: int = 0
    skipped: int = 0
    skip_reasons: dict[str, int] = field(default_factory=dict)

    def describe(self) -> str:
        parts = [f"{self.sentences_written} sentences written, {self.skipped} skipped"]
        for reason, count in sorted(self.skip_reasons.items()):
            parts.append(f"  {count} x {reason}")
        return "\n".join(parts)


def preprocess(
    input_path: Path | str, output_path: Path | str, limit: int | None = None
) -> PreprocessSummary:
    """Tokenize and parse every labeled sentence into a CoNLL-U block.

    Sentence ids are `<abstract-id>-s<k>`, deterministic from file position.
    Unparseable lines are skipped with a logged warning and counted.
    """
    with open(input_path, encoding="utf-8") as handle:
        sentences, read_summary = read_rct(handle)
    summary = PreprocessSummary(
        skipped=read_summary.skipped, skip_reasons=dict(read_summary.skip_reasons)
    )
    blocks = []
    for sentence in sentences:
        if limit is not None and summary.sentences_written >= limit:
            break
        tokens = tokenize(sentence.text)
        if not tokens:
            summary.skipped += 1
            summary.skip_reasons["no tokens"] = summary.skip_reasons.get("no tokens", 0) + 1
            logger.warning("sentence %s-s%d skipped: no tokens", sentence.abstract_id,
                           sentence.index_in_abstract)
            continue
        sent_id = f"{sentence.abstract_id}-s{sentence.index_in_abstract}"
        blocks.append(sentence_block(sent_id, sentence.label, tokens, parse(tokens)))
        summary.sentences_written += 1
    Path(output_path).write_text(write_document(blocks), encoding="utf-8")
    return summary


def sample_fixture(
    input_path: Path | str, per_class: int, seed: int, output_path: Path | str
) -> dict[str, int]:
    """Seeded class-balanced subset of the raw corpus, in the raw format.

    Emits per_class abstracts of one sentence per class, so downstream
    preprocessing of the sample yields a balanced corpus.
    """
    with open(input_path, encoding="utf-8") as handle:
        sentences, _ = read_rct(handle)
    by_label: dict[str, list[LabeledSentence]] = {label: [] for label in LABELS}
    for sentence in sentences:
        by_label[sentence.label].append(sentence)
    for label in LABELS:
        if len(by_label[label]) < per_class:
            raise ValueError(
                f"class {label} has only {len(by_label[label])} sentences, need {per_class}"
            )
    rng = random.Random(seed)
    chosen = {
        label: [by_label[label][i] for i in sorted(rng.sample(range(len(by_label[label])), per_class))]
        for label in LABELS
    }
    blocks = []
    for k in range(per_class):
        lines = [f"###fixture-{k + 1:04d}"]
        for label in LABELS:
            lines.append(f"{label}\t{chosen[label][k].text}")
        blocks.append("\n".join(lines))
    Path(output_path).write_text("\n\n".join(blocks) + "\n", encoding="utf-8")
    return {label: per_class for label in LABELS}
