"""Reader for the raw labeled-abstract format.

One sentence per line as `LABEL<TAB>text`; abstracts open with a `###id`
header line and are separated by blank lines. Lines that do not fit the
format are skipped with a logged warning and counted.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

logger = logging.getLogger("rctprep")

LABELS = ("BACKGROUND", "OBJECTIVE", "METHOD", "RESULT", "CONCLUSION")


@dataclass
class LabeledSentence:
    abstract_id: str
    index_in_abstract: int
    label: str
    text: str


@dataclass
class ReadSummary:
    sentences: int = 0
    abstracts: int = 0
    skipped: int = 0
    skip_reasons: dict[str, int] = field(default_factory=dict)

    def skip(self, line_no: int, reason: str) -> None:
        self.skipped += 1
        self.skip_reasons[reason] = self.skip_reasons.get(reason, 0) + 1
        logger.warning("line %d skipped: %s", line_no, reason)


def read_rct(lines: Iterable[str]) -> tuple[list[LabeledSentence], ReadSummary]:
    summary = ReadSummary()
    sentences: list[LabeledSentence] = []
    abstract_id: str | None = None
    index = 0
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            abstract_id = None
            continue
        if line.startswith("###"):
            abstract_id = line[3:].strip() or f"a{summary.abstracts + 1}"
            summary.abstracts += 1
            index = 0
            continue
        if line.count("\t") != 1:
            summary.skip(line_no, "expected exactly one tab")
            continue
        label, text = line.split("\t")
        label = label.strip()
        if label not in LABELS:
            summary.skip(line_no, f"unknown label {label!r}")
            continue
        if not text.strip():
            summary.skip(line_no, "empty sentence text")
            continue
        if abstract_id is None:
            abstract_id = f"a{summary.abstracts + 1}"
            summary.abstracts += 1
            index = 0
        index += 1
        sentences.append(LabeledSentence(abstract_id, index, label, text.strip()))
        summary.sentences += 1
    return sentences, summary
