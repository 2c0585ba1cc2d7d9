"""Corpus diversity measurement toolkit.

Quantifies how varied a text corpus is along three axes: vocabulary
(unique n-gram ratios), syntax (pairwise dependency-tree kernel distance),
and meaning (pairwise embedding dispersion). Also compares human-written
against model-generated corpora by estimating the supports of their
dependency-tree distributions and mining the part-of-speech patterns that
set the two apart.
"""

__version__ = "0.1.0"

from .corpus_io import (
    Corpus,
    DependencyTree,
    DiversityReport,
    Document,
    EmbeddingMatrix,
    Token,
    ValidationError,
    load_conllu,
    load_corpus,
    load_embeddings,
    split_sentences,
)
from .bench import (
    MetricTable,
    RunManifest,
    correlation_matrix,
    load_manifest,
    pearson,
    run_benchmark,
)
from .compare import (
    CompareConfig,
    PRResult,
    SupportModel,
    compare_corpora,
    estimate_support,
    kernel_embed,
    mine_pos_patterns,
    precision_recall,
)
from .lexical import LexicalConfig, lexical_diversity
from .semantic import SemanticConfig, scaled_cosine_distance, semantic_diversity
from .syntactic import (
    DistanceMatrix,
    SyntacticConfig,
    distance_matrix,
    syntactic_diversity,
    wl_distance,
    wl_features,
)

__all__ = [
    "CompareConfig",
    "Corpus",
    "DependencyTree",
    "DistanceMatrix",
    "DiversityReport",
    "Document",
    "EmbeddingMatrix",
    "LexicalConfig",
    "MetricTable",
    "PRResult",
    "RunManifest",
    "SemanticConfig",
    "SupportModel",
    "SyntacticConfig",
    "Token",
    "ValidationError",
    "__version__",
    "compare_corpora",
    "correlation_matrix",
    "distance_matrix",
    "estimate_support",
    "kernel_embed",
    "lexical_diversity",
    "load_conllu",
    "load_corpus",
    "load_embeddings",
    "load_manifest",
    "mine_pos_patterns",
    "pearson",
    "precision_recall",
    "run_benchmark",
    "scaled_cosine_distance",
    "semantic_diversity",
    "split_sentences",
    "syntactic_diversity",
    "wl_distance",
    "wl_features",
]
