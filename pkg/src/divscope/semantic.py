"""Semantic diversity: mean scaled cosine distance between sentence embeddings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus_io import DiversityReport, EmbeddingMatrix, ValidationError
from .pairwise import pair_distance_sum, unit_rows_dense
from .sampling import subsample_indices


@dataclass(frozen=True)
class SemanticConfig:
    max_sentences: int = 10_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_sentences < 2:
            raise ValidationError("max_sentences must be >= 2")

    def to_dict(self) -> dict:
        return {"max_sentences": self.max_sentences, "seed": self.seed}


def scaled_cosine_distance(u, v) -> float:
    """(1 - cosine) / 2, exactly 0.0 for identical inputs.

    Evaluated as the squared distance between the unit vectors over 4, which
    is the same quantity but cancels bitwise when u and v coincide.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValidationError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValidationError("zero-norm vector")
    diff = u / nu - v / nv
    return min(1.0, max(0.0, float(diff @ diff) / 4.0))


def semantic_diversity(
    emb: EmbeddingMatrix,
    config: SemanticConfig | None = None,
    *,
    corpus_id: str = "",
    workers: int = 1,
) -> DiversityReport:
    """Mean pairwise scaled cosine distance over (subsampled) rows, times 100.

    Rows are unit-normalized once and the pair sum runs through the same
    blocked Gram reduction as the tree-kernel score, so the result is
    bitwise reproducible for any worker count.
    """
    config = config or SemanticConfig()
    rng = np.random.default_rng(config.seed)
    idx = subsample_indices(len(emb.ids), config.max_sentences, rng)
    rows = emb.data[idx]
    n = rows.shape[0]
    if n < 2:
        raise ValidationError(f"need at least 2 rows, have {n}")
    unit = unit_rows_dense(rows)
    total = pair_distance_sum(unit, denom=4.0, workers=workers)
    pairs = n * (n - 1) // 2
    return DiversityReport(
        corpus_id=corpus_id,
        metric="semantic",
        score=100.0 * total / pairs,
        config=config.to_dict(),
        counts={
            "sentences": n,
            "sentences_available": len(emb.ids),
            "pairs": pairs,
            "dims": emb.dims,
        },
    )
