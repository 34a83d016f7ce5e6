"""Heuristic dependency parser: deterministic head attachment.

A real pretrained parser is the intended backend for production corpora,
but none can be vendored here, so this module provides a rule-based
fallback that always yields a valid tree: exactly one root, every head in
range, no token its own head, no cycles. Structures are plausible for the
simple declarative sentences of scientific abstracts; labels follow common
dependency conventions and are display-level only downstream.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

PIPELINE_NAME = "rctprep-rules"

DETERMINERS = {
    "a", "an", "the", "this", "these", "those", "each", "every", "no",
    "any", "some", "our", "their", "its", "his", "her", "all", "both",
}
AUXILIARIES = {
    "is", "are", "was", "were", "be", "been", "being", "am", "has", "have",
    "had", "do", "does", "did", "can", "could", "may", "might", "must",
    "shall", "should", "will", "would",
}
PREPOSITIONS = {
    "of", "in", "on", "at", "by", "with", "for", "from", "into", "over",
    "under", "between", "among", "during", "after", "before", "through",
    "about", "against", "within", "without", "across", "per", "than",
    "versus", "vs", "regarding", "as", "to",
}
CONJUNCTIONS = {"and", "or", "but", "nor"}
PRONOUNS = {"we", "they", "it", "i", "he", "she", "you"}
MARKERS = {"that", "whether", "if", "because", "while", "when", "although", "since"}
ADVERB_EXTRAS = {
    "more", "less", "most", "least", "very", "too", "also", "however",
    "worldwide", "often", "usually", "not", "then", "well",
}
VERBS = {
    "affects", "remains", "remain", "report", "reported", "propose",
    "proposed", "known", "aimed", "aim", "determine", "compare", "compared",
    "assess", "assessed", "sought", "seek", "evaluate", "evaluated",
    "examine", "examined", "test", "tested", "design", "designed",
    "measure", "measured", "randomized", "randomised", "assign", "assigned",
    "receive", "received", "complete", "completed", "record", "recorded",
    "reduce", "reduced", "improve", "improved", "relieve", "relieved",
    "decrease", "decreased", "increase", "increased", "observe", "observed",
    "suggest", "suggests", "appear", "appears", "confirm", "support",
    "supports", "offer", "offers", "consider", "managing", "monitor",
    "monitored", "show", "showed", "shown", "find", "found", "conduct",
    "conducted", "include", "included", "enrolled", "treat", "treated",
    "analyzed", "analysed", "collected", "performed", "screened",
}
_NUMBER = re.compile(r"^\d+([.,]\d+)*$")
_VERB_SUFFIX = re.compile(r".{3,}(ed|ize|ise|ate)$")

PUNCT, NUM, DET, AUX, PREP, CONJ, PRON, MARK, ADV, VERB, NOUN = range(11)


def _tag(tokens: Sequence[str]) -> list[int]:
    tags = []
    for token in tokens:
        lower = token.lower()
        if all(not ch.isalnum() for ch in token):
            tags.append(PUNCT)
        elif _NUMBER.match(token):
            tags.append(NUM)
        elif lower in DETERMINERS:
            tags.append(DET)
        elif lower in AUXILIARIES:
            tags.append(AUX)
        elif lower in MARKERS:
            tags.append(MARK)
        elif lower in PREPOSITIONS:
            tags.append(PREP)
        elif lower in CONJUNCTIONS:
            tags.append(CONJ)
        elif lower in PRONOUNS:
            tags.append(PRON)
        elif lower in VERBS:
            tags.append(VERB)
        elif lower.endswith("ly") or lower in ADVERB_EXTRAS:
            tags.append(ADV)
        elif _VERB_SUFFIX.match(lower):
            tags.append(VERB)
        else:
            tags.append(NOUN)
    return tags


def _next_with_tag(tags, start, wanted, step=1):
    i = start + step
    while 0 <= i < len(tags):
        if tags[i] in wanted:
            return i
        i += step
    return None


@dataclass
class Parse:
    heads: list[int]  # 1-based, 0 = root
    deprels: list[str]


def parse(tokens: Sequence[str]) -> Parse:
    n = len(tokens)
    if n == 0:
        return Parse([], [])
    tags = _tag(tokens)

    root = next((i for i, t in enumerate(tags) if t == VERB), None)
    if root is None:
        root = next((i for i, t in enumerate(tags) if t == AUX), None)
    if root is None:
        root = next((i for i, t in enumerate(tags) if t == NOUN), None)
    if root is None:
        root = 0

    heads = [None] * n  # type: list[int | None]
    rels = ["dep"] * n
    heads[root] = -1
    rels[root] = "root"

    def attach(i: int, head: int, rel: str) -> None:
        if heads[i] is None and head != i:
            heads[i] = head
            rels[i] = rel

    # prepositions first: they claim their object nouns
    for i in range(n):
        if tags[i] is not PREP or i == root:
            continue
        obj = _next_with_tag(tags, i, {NOUN, NUM, PRON, VERB})
        if obj is None:
            attach(i, root, "case")
            continue
        attach(i, obj, "case")
        if obj == root or heads[obj] is not None:
            continue
        governor = _next_with_tag(tags, i, {NOUN, VERB, AUX}, step=-1)
        if tags[obj] is VERB:
            attach(obj, governor if governor is not None else root, "advcl")
        elif governor is not None and tags[governor] is NOUN:
            attach(obj, governor, "nmod")
        else:
            attach(obj, governor if governor is not None else root, "obl")

    for i in range(n):
        if heads[i] is not None:
            continue
        tag = tags[i]
        if tag is PUNCT:
            attach(i, root, "punct")
        elif tag is DET:
            target = _next_with_tag(tags, i, {NOUN, NUM})
            attach(i, target if target is not None else root, "det")
        elif tag is NUM:
            target = _next_with_tag(tags, i, {NOUN})
            if target is None:
                target = _next_with_tag(tags, i, {NOUN, VERB}, step=-1)
            attach(i, target if target is not None else root, "nummod")
        elif tag is AUX:
            target = _next_with_tag(tags, i, {VERB})
            rel = "aux"
            if target is None:
                target = root
                rel = "cop" if tags[root] in (NOUN, NUM, PRON) else "aux"
            attach(i, target, rel)
        elif tag is MARK:
            target = _next_with_tag(tags, i, {VERB})
            attach(i, target if target is not None else root, "mark")
        elif tag is CONJ:
            target = _next_with_tag(tags, i, {NOUN, NUM, VERB})
            attach(i, target if target is not None else root, "cc")
        elif tag is ADV:
            target = _next_with_tag(tags, i, {VERB})
            if target is None:
                target = _next_with_tag(tags, i, {VERB}, step=-1)
            attach(i, target if target is not None else root, "advmod")
        elif tag is PRON:
            verb = _next_with_tag(tags, i, {VERB, AUX})
            attach(i, verb if verb is not None else root, "nsubj")
        elif tag is VERB:
            governor = _next_with_tag(tags, i, {VERB}, step=-1)
            has_mark = any(tags[j] is MARK for j in range(max(0, i - 3), i))
            rel = "ccomp" if has_mark else "xcomp"
            attach(i, governor if governor is not None else root, rel)
        else:  # NOUN
            if i + 1 < n and tags[i + 1] in (NOUN, NUM) and i + 1 != root:
                attach(i, i + 1, "compound")
            elif i < root:
                attach(i, root, "nsubj")
            else:
                attach(i, root, "obj" if tags[root] is VERB else "dep")

    for i in range(n):
        if heads[i] is None:
            heads[i] = root

    # break any attachment cycle by re-rooting the first revisited node,
    # which necessarily lies on the cycle
    for start in range(n):
        seen = set()
        node = start
        while node != root and heads[node] != -1:
            if node in seen:
                heads[node] = root
                rels[node] = "dep"
                break
            seen.add(node)
            node = heads[node]

    final_heads = [0 if h == -1 else h + 1 for h in heads]
    return Parse(final_heads, rels)
