"""Command line for the preprocessing jobs."""

from __future__ import annotations

import argparse
import logging
import sys

from .pipeline import preprocess, sample_fixture

__all__ = ["main"]


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(format="%(levelname)s %(message)s")
    parser = argparse.ArgumentParser(
        prog="rctprep",
        description="turn labeled raw abstracts into CoNLL-U sentence graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_pre = sub.add_parser("preprocess", help="parse a raw corpus into CoNLL-U")
    p_pre.add_argument("--in", dest="input", required=True, help="raw LABEL<TAB>text file")
    p_pre.add_argument("--out", dest="output", required=True, help="CoNLL-U output file")
    p_pre.add_argument("--limit", type=int, default=None, help="max sentences to emit")
    p_fix = sub.add_parser("fixture", help="sample a class-balanced raw subset")
    p_fix.add_argument("--in", dest="input", required=True)
    p_fix.add_argument("--per-class", dest="per_class", type=int, required=True)
    p_fix.add_argument("--seed", type=int, required=True)
    p_fix.add_argument("--out", dest="output", required=True)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        if args.command == "preprocess":
            summary = preprocess(args.input, args.output, args.limit)
            print(summary.describe())
        else:
            counts = sample_fixture(args.input, args.per_class, args.seed, args.output)
            total = sum(counts.values())
            print(f"sampled {total} sentences ({args.per_class} per class)")
        return 0
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
