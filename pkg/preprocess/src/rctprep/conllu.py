"""CoNLL-U emission for parsed sentences."""

from __future__ import annotations

from typing import Iterable, Sequence

from .parser import PIPELINE_NAME, Parse


def sentence_block(sent_id: str, label: str, tokens: Sequence[str], parse: Parse) -> str:
    """One CoNLL-U block with the sentence id and label comments."""
    lines = [f"# sent_id = {sent_id}", f"# label = {label}"]
    for i, token in enumerate(tokens):
        lines.append(
            "\t".join(
                [
                    str(i + 1),
                    token,
                    "_",
                    "_",
                    "_",
                    "_",
                    str(parse.heads[i]),
                    parse.deprels[i],
                    "_",
                    "_",
                ]
            )
        )
    return "\n".join(lines)


def write_document(blocks: Iterable[str], generator: str = PIPELINE_NAME) -> str:
    """Join blocks into one document, pinning the pipeline in a header comment.

    The generator comment rides on the first sentence block (readers ignore
    unknown comment keys) so there is no token-less leading block.
    """
    body = "\n\n".join(blocks)
    if not body:
        return ""
    return f"# generator = {generator}\n{body}\n"
