"""Command-line entry point.

Exit codes: 0 on success, 1 on validation or usage failure, 2 when a
benchmark run finished with holes (some cells failed).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .bench import (
    correlation_matrix,
    emit_plot_data,
    load_manifest,
    load_metric_table,
    pearson,
    read_quality_vectors,
    run_benchmark,
    write_correlation_csv,
    write_metric_table,
)
from .corpus_io import (
    ValidationError,
    load_conllu,
    load_corpus,
    load_embeddings,
    write_report,
)
from .compare import CompareConfig, compare_corpora
from .lexical import LexicalConfig, lexical_diversity
from .sampling import resolve_seed
from .semantic import SemanticConfig, semantic_diversity
from .syntactic import (
    SyntacticConfig,
    distance_matrix,
    syntactic_diversity,
    write_distance_matrix,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract reserves 2 for partial
    # benchmark failures, so usage problems surface as exit 1 instead
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _pattern_range(text: str) -> tuple[int, ...]:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return tuple(range(int(lo), int(hi) + 1))
        return _int_list(text)
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise argparse.ArgumentTypeError(
            f"expected a range like 3..6 or comma-separated integers, got {text!r}"
        ) from exc


def _write_json(payload: dict, path: str) -> None:
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
        newline="\n",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="divscope", description="Corpus diversity measurement")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="base seed; falls back to $DIVSCOPE_SEED, then 0")
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("lexical", help="unique n-gram score over a JSONL corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--ns", type=_int_list, default=(1, 2, 3))
    p.add_argument("--sample", type=int, default=40_000)
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("--out", required=True)
    common(p)

    p = sub.add_parser("syntactic", help="tree-kernel score over a CoNLL-U file")
    p.add_argument("--conllu", required=True)
    p.add_argument("--wl-iters", type=int, default=2)
    p.add_argument("--max-sentences", type=int, default=10_000)
    p.add_argument("--emit-distances", default=None, metavar="MATRIX.BIN")
    p.add_argument("--out", required=True)
    common(p)

    p = sub.add_parser("semantic", help="embedding dispersion over a DVEM file")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--max-sentences", type=int, default=10_000)
    p.add_argument("--out", required=True)
    common(p)

    p = sub.add_parser("compare", help="support precision/recall of model vs human trees")
    p.add_argument("--human", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--pca-dims", type=int, default=50)
    p.add_argument("--clusters", type=int, default=50)
    p.add_argument("--min-support", type=int, default=5)
    p.add_argument("--cap", type=int, default=5_000)
    p.add_argument("--patterns", type=_pattern_range, default=(3, 4, 5, 6))
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--out", required=True)
    common(p)

    p = sub.add_parser("bench", help="run all metrics over a manifest of corpora")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--lexical-ns", type=_int_list, default=None)
    p.add_argument("--lexical-sample", type=int, default=None)
    p.add_argument("--lexical-no-lowercase", action="store_true")
    p.add_argument("--wl-iters", type=int, default=None)
    p.add_argument("--syntactic-max-sentences", type=int, default=None)
    p.add_argument("--semantic-max-sentences", type=int, default=None)
    common(p)

    p = sub.add_parser("correlate", help="Pearson matrix over metric (and quality) columns")
    p.add_argument("--table", required=True)
    p.add_argument("--manifest", default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("plot-data", help="long-format CSV of table scores with roles")
    p.add_argument("--table", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)

    return parser


def _cmd_lexical(args) -> int:
    config = LexicalConfig(
        ns=args.ns,
        sample_size=args.sample,
        seed=resolve_seed(args.seed),
        lowercase=not args.no_lowercase,
    )
    report = lexical_diversity(load_corpus(args.corpus), config)
    write_report(report, args.out)
    print(f"lexical {report.corpus_id} {report.score!r}")
    return 0


def _cmd_syntactic(args) -> int:
    config = SyntacticConfig(
        wl_iterations=args.wl_iters,
        max_sentences=args.max_sentences,
        seed=resolve_seed(args.seed),
    )
    trees = load_conllu(args.conllu)
    corpus_id = Path(args.conllu).stem
    report = syntactic_diversity(trees, config, corpus_id=corpus_id, workers=args.workers)
    write_report(report, args.out)
    if args.emit_distances:
        write_distance_matrix(
            distance_matrix(trees, config, workers=args.workers), args.emit_distances
        )
    print(f"syntactic {corpus_id} {report.score!r}")
    return 0


def _cmd_semantic(args) -> int:
    config = SemanticConfig(max_sentences=args.max_sentences, seed=resolve_seed(args.seed))
    corpus_id = Path(args.embeddings).stem
    report = semantic_diversity(
        load_embeddings(args.embeddings), config, corpus_id=corpus_id, workers=args.workers
    )
    write_report(report, args.out)
    print(f"semantic {corpus_id} {report.score!r}")
    return 0


def _cmd_compare(args) -> int:
    config = CompareConfig(
        pca_dims=args.pca_dims,
        k_clusters=args.clusters,
        min_support=args.min_support,
        per_side_cap=args.cap,
        seed=resolve_seed(args.seed),
    )
    payload = compare_corpora(
        load_conllu(args.human),
        load_conllu(args.model),
        config,
        n_range=args.patterns,
        top_k=args.top,
        workers=args.workers,
    )
    payload["human_id"] = Path(args.human).stem
    payload["model_id"] = Path(args.model).stem
    _write_json(payload, args.out)
    print(f"compare {payload['human_id']} vs {payload['model_id']} "
          f"precision {payload['precision']!r} recall {payload['recall']!r}")
    return 0


def _cmd_bench(args) -> int:
    manifest = load_manifest(args.manifest)
    lexical = manifest.lexical
    if args.lexical_ns is not None:
        lexical = replace(lexical, ns=args.lexical_ns)
    if args.lexical_sample is not None:
        lexical = replace(lexical, sample_size=args.lexical_sample)
    if args.lexical_no_lowercase:
        lexical = replace(lexical, lowercase=False)
    syntactic = manifest.syntactic
    if args.wl_iters is not None:
        syntactic = replace(syntactic, wl_iterations=args.wl_iters)
    if args.syntactic_max_sentences is not None:
        syntactic = replace(syntactic, max_sentences=args.syntactic_max_sentences)
    semantic = manifest.semantic
    if args.semantic_max_sentences is not None:
        semantic = replace(semantic, max_sentences=args.semantic_max_sentences)
    if args.seed is not None:
        seed = resolve_seed(args.seed)
        lexical = replace(lexical, seed=seed)
        syntactic = replace(syntactic, seed=seed)
        semantic = replace(semantic, seed=seed)
    manifest = replace(manifest, lexical=lexical, syntactic=syntactic, semantic=semantic)

    table = run_benchmark(manifest, workers=args.workers)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_metric_table(table, out_dir / "table.json", out_dir / "table.csv")
    for cell in table.rows:
        status = repr(cell.score) if cell.error is None else f"ERROR {cell.error}"
        print(f"{cell.corpus_id} {cell.metric} {status}")
    return 2 if table.has_holes else 0


def _cmd_correlate(args) -> int:
    table = load_metric_table(args.table)
    quality = None
    if args.manifest is not None:
        quality = read_quality_vectors(load_manifest(args.manifest))
    labels, matrix = correlation_matrix(table, quality)
    write_correlation_csv(labels, matrix, args.out)
    print(f"correlate {len(labels)} columns -> {args.out}")
    return 0


def _cmd_plot_data(args) -> int:
    table = load_metric_table(args.table)
    manifest = load_manifest(args.manifest)
    emit_plot_data(table, manifest, args.out)
    print(f"plot-data {len(table.rows)} cells -> {args.out}")
    return 0


_COMMANDS = {
    "lexical": _cmd_lexical,
    "syntactic": _cmd_syntactic,
    "semantic": _cmd_semantic,
    "compare": _cmd_compare,
    "bench": _cmd_bench,
    "correlate": _cmd_correlate,
    "plot-data": _cmd_plot_data,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
