"""Command-line entry point.

Exit codes follow the measurement CLI's conventions: 0 on success, 1 on
usage, input, or model-loading failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .backends import AdapterConfig, AdapterError
from .pipeline import embed_corpus, parse_corpus


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="divscope-prep",
        description="Produce dependency-parse and sentence-embedding inputs from a JSONL corpus",
    )
    parser.add_argument("--corpus", required=True, help="input corpus, one JSON document per line")
    parser.add_argument("--lang", default="en", help="ISO 639 language code (default: en)")
    parser.add_argument("--out-conllu", default=None, help="where to write dependency parses")
    parser.add_argument("--out-emb", default=None, help="where to write the embedding matrix")
    parser.add_argument("--parser-model", default="stanza",
                        help="parser backend: stanza or rule (default: stanza)")
    parser.add_argument("--embedder-model", default="auto",
                        help="embedder: auto, a sentence-transformers id, or hash:<dims>")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--device", default="cpu")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.out_conllu is None and args.out_emb is None:
            raise _UsageError(f"{parser.prog}: at least one of --out-conllu/--out-emb is required")
        config = AdapterConfig(
            parser_model=args.parser_model,
            embedder_model=args.embedder_model,
            language=args.lang,
            batch_size=args.batch_size,
            device=args.device,
        )
        if args.out_conllu is not None:
            summary = parse_corpus(args.corpus, args.out_conllu, config)
            print(
                f"parsed {summary['sentences']} sentences from {summary['documents']} documents "
                f"({summary['skipped']} skipped) -> {args.out_conllu}"
            )
        if args.out_emb is not None:
            summary = embed_corpus(args.corpus, args.out_emb, config)
            print(
                f"embedded {summary['sentences']} sentences at {summary['dims']} dims "
                f"({summary['skipped']} skipped) -> {args.out_emb}"
            )
        return 0
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (AdapterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
