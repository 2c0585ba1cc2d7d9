"""Preprocessing adapter: raw JSONL corpora to dependency parses and
sentence embeddings in the formats the measurement package reads."""

from .backends import (
    AdapterConfig,
    AdapterError,
    HashEmbedder,
    RuleParser,
    load_embedder,
    load_parser,
    segment_sentences,
)
from .pipeline import embed_corpus, parse_corpus, read_corpus

__all__ = [
    "AdapterConfig",
    "AdapterError",
    "HashEmbedder",
    "RuleParser",
    "embed_corpus",
    "load_embedder",
    "load_parser",
    "parse_corpus",
    "read_corpus",
    "segment_sentences",
]
