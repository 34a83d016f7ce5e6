"""Deterministic rule tokenizer for biomedical abstract sentences.

Splits on whitespace, then peels bracketing and clause punctuation off the
ends of each chunk. Decimal numbers, hyphenated compounds and internal
apostrophes stay intact.
"""

from __future__ import annotations

import re

_LEADING = "([{\"'`“‘"
_TRAILING = ")]}\"'`”’.,;:!?%"
_DECIMAL = re.compile(r"^\d+([.,]\d+)+$")


def tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    for chunk in text.split():
        head: list[str] = []
        tail: list[str] = []
        while len(chunk) > 1 and chunk[0] in _LEADING:
            head.append(chunk[0])
            chunk = chunk[1:]
        while len(chunk) > 1 and chunk[-1] in _TRAILING:
            if _DECIMAL.match(chunk):
                break  # keep decimals like 0.05 whole
            tail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(head)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(tail))
    return tokens
