"""Support-overlap comparison of two dependency-tree distributions.

Both corpora are embedded jointly: WL feature vectors, cosine-normalized
Gram matrix, classical MDS down to a fixed dimension. Cluster supports on
the joint point cloud then give precision (model trees inside the human
support) and recall (human trees inside the model support), plus ranked
POS n-gram patterns that distinguish the sides.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .corpus_io import DependencyTree, ValidationError
from .sampling import subsample_indices
from .syntactic import (
    LabelDictionary,
    SyntacticConfig,
    features_for_trees,
    normalized_feature_matrix,
)


@dataclass(frozen=True)
class CompareConfig:
    pca_dims: int = 50
    k_clusters: int = 50
    min_support: int = 5
    per_side_cap: int = 5_000
    kmeans_restarts: int = 10
    kmeans_iters: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.pca_dims < 1:
            raise ValidationError("pca_dims must be >= 1")
        if self.k_clusters < 2:
            raise ValidationError("k_clusters must be >= 2")
        if self.min_support < 1:
            raise ValidationError("min_support must be >= 1")
        if self.per_side_cap < self.k_clusters:
            raise ValidationError("per_side_cap must be >= k_clusters")
        if self.kmeans_restarts < 1 or self.kmeans_iters < 1:
            raise ValidationError("kmeans_restarts and kmeans_iters must be >= 1")

    def to_dict(self) -> dict:
        return {
            "pca_dims": self.pca_dims,
            "k_clusters": self.k_clusters,
            "min_support": self.min_support,
            "per_side_cap": self.per_side_cap,
            "kmeans_restarts": self.kmeans_restarts,
            "kmeans_iters": self.kmeans_iters,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class SupportModel:
    """Clustered joint point cloud with per-side support sets.

    ``side`` is True for human-side samples. A cluster belongs to a side's
    support iff at least ``min_support`` of that side's samples land in it.
    """

    centroids: np.ndarray
    assignments: np.ndarray
    side: np.ndarray
    human_support: frozenset[int]
    model_support: frozenset[int]
    config: CompareConfig

    def __post_init__(self) -> None:
        k = self.centroids.shape[0]
        n = self.assignments.shape[0]
        if self.side.shape != (n,):
            raise ValidationError("side flags must match assignments")
        if n and (self.assignments.min() < 0 or self.assignments.max() >= k):
            raise ValidationError("assignments must index centroids")
        ms = self.config.min_support
        human = np.bincount(self.assignments[self.side], minlength=k)
        model = np.bincount(self.assignments[~self.side], minlength=k)
        if self.human_support != frozenset(np.flatnonzero(human >= ms).tolist()):
            raise ValidationError("human_support inconsistent with assignments")
        if self.model_support != frozenset(np.flatnonzero(model >= ms).tolist()):
            raise ValidationError("model_support inconsistent with assignments")

    @property
    def per_cluster_counts(self) -> tuple[tuple[int, int], ...]:
        """(human, model) sample counts per cluster index."""
        k = self.centroids.shape[0]
        human = np.bincount(self.assignments[self.side], minlength=k)
        model = np.bincount(self.assignments[~self.side], minlength=k)
        return tuple((int(h), int(m)) for h, m in zip(human, model))


@dataclass(frozen=True)
class PRResult:
    precision: float
    recall: float
    config: CompareConfig
    counts: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not (0.0 <= self.precision <= 100.0 and 0.0 <= self.recall <= 100.0):
            raise ValidationError("precision and recall must lie in [0, 100]")

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "config": self.config.to_dict(),
            "per_cluster": [list(pair) for pair in self.counts],
        }


# ---------------------------------------------------------------------------
# joint kernel embedding


def _subsampled_sides(trees_h, trees_m, config: CompareConfig):
    # side-tagged child generators keep the two draws independent of each
    # other and of corpus order
    rng_h = np.random.default_rng((config.seed, 0))
    rng_m = np.random.default_rng((config.seed, 1))
    used_h = [trees_h[i] for i in subsample_indices(len(trees_h), config.per_side_cap, rng_h)]
    used_m = [trees_m[i] for i in subsample_indices(len(trees_m), config.per_side_cap, rng_m)]
    return used_h, used_m


def _embed_points(used_h, used_m, config: CompareConfig) -> np.ndarray:
    if not used_h or not used_m:
        raise ValidationError("both sides must be non-empty")
    wl_config = SyntacticConfig()
    labels = LabelDictionary()
    feats = features_for_trees(list(used_h) + list(used_m), wl_config, labels)
    unit = normalized_feature_matrix(feats, len(labels))
    gram = np.asarray((unit @ unit.T).todense(), dtype=np.float64)
    gram = (gram + gram.T) / 2.0
    n = gram.shape[0]
    row_means = gram.mean(axis=1)
    centered = gram - row_means[:, None] - row_means[None, :] + gram.mean()
    eigvals, eigvecs = np.linalg.eigh(centered)
    top = eigvals[-1]
    tol = n * np.finfo(np.float64).eps * max(top, 0.0)
    positive = np.flatnonzero(eigvals > tol)
    if positive.size == 0:
        warnings.warn("centered kernel has no positive eigenvalues; all points at the origin")
        return np.zeros((n, 1))
    order = positive[::-1]
    if order.size < config.pca_dims:
        warnings.warn(
            f"only {order.size} positive eigenvalues; "
            f"reducing embedding dims from {config.pca_dims}"
        )
    keep = order[: config.pca_dims]
    vecs = eigvecs[:, keep].copy()
    for j in range(vecs.shape[1]):
        if vecs[np.argmax(np.abs(vecs[:, j])), j] < 0.0:
            vecs[:, j] = -vecs[:, j]
    return vecs * np.sqrt(eigvals[keep])[None, :]


def kernel_embed(trees_h, trees_m, config: CompareConfig | None = None) -> np.ndarray:
    """Joint MDS point cloud for both tree sets, human rows first.

    The double-centered cosine-normalized WL Gram is eigendecomposed; points
    are eigenvectors scaled by the square roots of the descending positive
    eigenvalues, each eigenvector's largest-magnitude entry made positive.
    Pairwise point distances reproduce kernel distances when no eigenvalue
    is truncated.
    """
    config = config or CompareConfig()
    used_h, used_m = _subsampled_sides(trees_h, trees_m, config)
    return _embed_points(used_h, used_m, config)


# ---------------------------------------------------------------------------
# support estimation


def _center_distances(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # one column per center, each a plain row reduction: matches the scalar
    # reference arithmetic bitwise, unlike the expanded -2xc + x2 + c2 form
    n, k = X.shape[0], centers.shape[0]
    out = np.empty((n, k))
    for c in range(k):
        out[:, c] = ((X - centers[c]) ** 2).sum(axis=1)
    return out


def _kmeans_restart(X: np.ndarray, k: int, iters: int, seed: int, restart: int):
    n = X.shape[0]
    rng = np.random.default_rng((seed, restart))
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[int(rng.integers(n))]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = X[idx]
        d2 = np.minimum(d2, ((X - centers[c]) ** 2).sum(axis=1))

    prev = None
    for _ in range(iters):
        dist = _center_distances(X, centers)
        assign = np.argmin(dist, axis=1)
        filled = np.bincount(assign, minlength=k)
        if (filled == 0).any():
            # re-seed each empty centroid from the farthest unclaimed point,
            # then restart the convergence test
            candidates = dist[np.arange(n), assign].copy()
            for c in np.flatnonzero(filled == 0):
                farthest = int(np.argmax(candidates))
                centers[c] = X[farthest]
                candidates[farthest] = -np.inf
            prev = None
            continue
        if prev is not None and np.array_equal(assign, prev):
            break
        for c in range(k):
            centers[c] = X[assign == c].mean(axis=0)
        prev = assign

    dist = _center_distances(X, centers)
    assign = np.argmin(dist, axis=1)
    wcss = math.fsum(dist[np.arange(n), assign].tolist())
    return wcss, assign, centers


def estimate_support(
    points: np.ndarray, sides, config: CompareConfig | None = None, *, workers: int = 1
) -> SupportModel:
    """Best-of-restarts k-means over the joint cloud, then per-side supports.

    Restart r draws from ``default_rng((seed, r))``; the winner is the
    lowest within-cluster sum of squares, ties to the lowest restart index,
    so the result is independent of worker count.
    """
    config = config or CompareConfig()
    X = np.asarray(points, dtype=np.float64)
    side = np.asarray(sides, dtype=bool)
    n = X.shape[0]
    if side.shape != (n,):
        raise ValidationError("side flags must match points")
    if n < config.k_clusters:
        raise ValidationError(f"k_clusters={config.k_clusters} exceeds {n} points")

    def run(r: int):
        return _kmeans_restart(X, config.k_clusters, config.kmeans_iters, config.seed, r)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(config.kmeans_restarts)))
    else:
        results = [run(r) for r in range(config.kmeans_restarts)]
    best = min(range(len(results)), key=lambda r: (results[r][0], r))
    _, assign, centers = results[best]

    human = np.bincount(assign[side], minlength=config.k_clusters)
    model = np.bincount(assign[~side], minlength=config.k_clusters)
    return SupportModel(
        centroids=centers,
        assignments=assign,
        side=side,
        human_support=frozenset(np.flatnonzero(human >= config.min_support).tolist()),
        model_support=frozenset(np.flatnonzero(model >= config.min_support).tolist()),
        config=config,
    )


def precision_recall(model: SupportModel) -> PRResult:
    """Share of each side's samples landing in the other side's support."""
    human_n = int(model.side.sum())
    model_n = int((~model.side).sum())
    if human_n == 0 or model_n == 0:
        raise ValidationError("both sides need at least one sample")
    in_human = np.isin(model.assignments[~model.side], sorted(model.human_support))
    in_model = np.isin(model.assignments[model.side], sorted(model.model_support))
    return PRResult(
        precision=100.0 * int(in_human.sum()) / model_n,
        recall=100.0 * int(in_model.sum()) / human_n,
        config=model.config,
        counts=model.per_cluster_counts,
    )


# ---------------------------------------------------------------------------
# pattern mining


def _collect_ngrams(trees, n_range):
    """Counts and first example span per POS n-gram, over token linear order."""
    counts: dict[tuple[str, ...], int] = {}
    examples: dict[tuple[str, ...], str] = {}
    for tree in trees:
        tags = [tok.upos for tok in tree.nodes]
        forms = [tok.form for tok in tree.nodes]
        for n in n_range:
            for i in range(len(tags) - n + 1):
                gram = tuple(tags[i : i + n])
                counts[gram] = counts.get(gram, 0) + 1
                if gram not in examples:
                    examples[gram] = " ".join(forms[i : i + n])
    return counts, examples


def mine_pos_patterns(
    trees_h,
    trees_m,
    model: SupportModel,
    n_range=(3, 4, 5, 6),
    top_k: int = 20,
) -> dict:
    """Ranked POS n-gram lists distinguishing the sides.

    Human-favored patterns count only human trees clustered outside the
    model support, ranked by frequency. Model-favored patterns rank all
    model trees by frequency over add-one-smoothed human frequency. Tree
    lists must be the embedded (subsampled) ones, human block first.
    """
    if not n_range or min(n_range) < 1:
        raise ValidationError("n_range must hold positive lengths")
    if top_k < 1:
        raise ValidationError("top_k must be >= 1")
    n_h = len(trees_h)
    if n_h + len(trees_m) != model.assignments.shape[0]:
        raise ValidationError("trees misaligned with support model")
    if not model.side[:n_h].all() or model.side[n_h:].any():
        raise ValidationError("trees misaligned with support model")

    outside = [
        tree
        for tree, cluster in zip(trees_h, model.assignments[:n_h])
        if int(cluster) not in model.model_support
    ]
    if outside:
        human_counts, human_examples = _collect_ngrams(outside, n_range)
        human_ranked = sorted(human_counts, key=lambda g: (-human_counts[g], g))
        human_favored = [
            {"pattern": list(g), "count": human_counts[g], "example": human_examples[g]}
            for g in human_ranked[:top_k]
        ]
    else:
        warnings.warn("no human trees outside the model support; empty human-favored list")
        human_favored = []

    model_counts, model_examples = _collect_ngrams(trees_m, n_range)
    baseline, _ = _collect_ngrams(trees_h, n_range)
    scored = {g: c / (1.0 + baseline.get(g, 0)) for g, c in model_counts.items()}
    model_ranked = sorted(scored, key=lambda g: (-scored[g], -model_counts[g], g))
    model_favored = [
        {
            "pattern": list(g),
            "count_model": model_counts[g],
            "count_human": baseline.get(g, 0),
            "score": scored[g],
            "example": model_examples[g],
        }
        for g in model_ranked[:top_k]
    ]
    return {"human_favored": human_favored, "model_favored": model_favored}


# ---------------------------------------------------------------------------
# orchestration


def compare_corpora(
    trees_h,
    trees_m,
    config: CompareConfig | None = None,
    *,
    n_range=(3, 4, 5, 6),
    top_k: int = 20,
    workers: int = 1,
) -> dict:
    """Full comparison: embed, cluster, score, mine patterns.

    Returns a JSON-ready payload with precision/recall, per-cluster counts,
    support sets, and both pattern lists.
    """
    config = config or CompareConfig()
    used_h, used_m = _subsampled_sides(trees_h, trees_m, config)
    points = _embed_points(used_h, used_m, config)
    side = np.array([True] * len(used_h) + [False] * len(used_m))
    support = estimate_support(points, side, config, workers=workers)
    pr = precision_recall(support)
    patterns = mine_pos_patterns(used_h, used_m, support, n_range, top_k)
    return {
        "precision": pr.precision,
        "recall": pr.recall,
        "config": config.to_dict(),
        "counts": {
            "human_sentences": len(used_h),
            "model_sentences": len(used_m),
            "human_available": len(trees_h),
            "model_available": len(trees_m),
            "clusters": config.k_clusters,
            "human_support": sorted(support.human_support),
            "model_support": sorted(support.model_support),
            "per_cluster": [list(pair) for pair in pr.counts],
        },
        "patterns": {
            "ns": list(n_range),
            "top_k": top_k,
            "human_favored": patterns["human_favored"],
            "model_favored": patterns["model_favored"],
        },
    }
