"""Syntactic diversity via the Weisfeiler-Lehman subtree kernel.

Dependency trees become undirected graphs labeled with UPOS tags. Each tree
is mapped once to an explicit sparse feature vector (label counts across WL
refinement iterations 0..h); the pairwise phase is sparse dot products only.
The corpus score is 100 times the mean cosine-normalized kernel distance
over all unordered tree pairs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .corpus_io import (
    _DVEM_HEADER,
    _DVEM_MAGIC,
    _DVEM_VERSION,
    DependencyTree,
    DiversityReport,
    ROOT,
    ValidationError,
    sidecar_path,
)
from .pairwise import pair_distance_sum
from .sampling import subsample_indices


@dataclass(frozen=True)
class SyntacticConfig:
    wl_iterations: int = 2
    max_sentences: int = 10_000
    seed: int = 0
    include_deprel: bool = False

    def __post_init__(self) -> None:
        if self.wl_iterations < 0:
            raise ValidationError("wl_iterations must be >= 0")
        if self.max_sentences < 2:
            raise ValidationError("max_sentences must be >= 2")

    def to_dict(self) -> dict:
        return {
            "wl_iterations": self.wl_iterations,
            "max_sentences": self.max_sentences,
            "seed": self.seed,
            "include_deprel": self.include_deprel,
        }


@dataclass
class LabeledGraph:
    """Undirected node-labeled graph; edge labels only when relations are kept."""

    labels: list[str]
    adj: list[list[int]]
    edge_labels: list[list[str]] | None = None


class LabelDictionary:
    """Append-only interning of WL signatures to dense integer ids.

    Base labels intern as strings, refined signatures as (label-id, sorted
    neighbor tuple) pairs; the key shapes cannot collide, and ids are stable
    for the lifetime of the dictionary.
    """

    def __init__(self) -> None:
        self._ids: dict = {}

    def intern(self, key) -> int:
        ident = self._ids.get(key)
        if ident is None:
            ident = len(self._ids)
            self._ids[key] = ident
        return ident

    def __len__(self) -> int:
        return len(self._ids)


@dataclass
class WLFeatureVector:
    """Sparse label counts accumulated over iterations 0..h."""

    counts: dict[int, int]
    self_kernel: int

    def __post_init__(self) -> None:
        if any(c <= 0 for c in self.counts.values()):
            raise ValidationError("feature counts must be positive")
        if self.self_kernel != sum(c * c for c in self.counts.values()):
            raise ValidationError("self_kernel must equal the sum of squared counts")


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric pairwise distances in [0, 1] with zero diagonal."""

    ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.ids)
        if self.values.shape != (n, n):
            raise ValidationError("distance matrix shape must match ids")
        if n and (self.values.min() < 0.0 or self.values.max() > 1.0):
            raise ValidationError("distances must lie in [0, 1]")
        if n and np.diagonal(self.values).any():
            raise ValidationError("diagonal must be zero")
        if not np.array_equal(self.values, self.values.T):
            raise ValidationError("distance matrix must be symmetric")


def tree_to_graph(tree: DependencyTree, include_deprel: bool = False) -> LabeledGraph:
    """Undirected graph: one node per token, one edge per head link.

    The root's virtual link contributes no edge, so a tree with n tokens has
    exactly n - 1 edges. Node labels are UPOS tags; with ``include_deprel``
    each edge additionally carries its dependency relation.
    """
    n = len(tree.nodes)
    adj: list[list[int]] = [[] for _ in range(n)]
    edge_labels: list[list[str]] | None = [[] for _ in range(n)] if include_deprel else None
    for i, head in enumerate(tree.heads):
        if head == ROOT:
            continue
        adj[i].append(head)
        adj[head].append(i)
        if edge_labels is not None:
            edge_labels[i].append(tree.deprels[i])
            edge_labels[head].append(tree.deprels[i])
    return LabeledGraph(labels=[tok.upos for tok in tree.nodes], adj=adj, edge_labels=edge_labels)


def wl_features(graph: LabeledGraph, h: int, labels: LabelDictionary) -> WLFeatureVector:
    """Explicit WL feature map of one graph, using a shared label dictionary.

    Iteration 0 counts the initial labels; each refinement relabels a node
    with the id of (current label, sorted multiset of neighbor labels).
    Counts from all iterations accumulate into one sparse vector. Vectors are
    only comparable when built against the same dictionary and the same h.
    """
    current = [labels.intern(lab) for lab in graph.labels]
    counts: dict[int, int] = {}
    for ident in current:
        counts[ident] = counts.get(ident, 0) + 1
    for _ in range(h):
        refined = []
        for v, own in enumerate(current):
            if graph.edge_labels is None:
                neigh = tuple(sorted(current[u] for u in graph.adj[v]))
            else:
                neigh = tuple(
                    sorted(
                        (graph.edge_labels[v][k], current[u])
                        for k, u in enumerate(graph.adj[v])
                    )
                )
            refined.append(labels.intern((own, neigh)))
        current = refined
        for ident in current:
            counts[ident] = counts.get(ident, 0) + 1
    return WLFeatureVector(counts=counts, self_kernel=sum(c * c for c in counts.values()))


def wl_distance(a: WLFeatureVector, b: WLFeatureVector) -> float:
    """1 - cosine-normalized kernel value, in [0, 1]."""
    small, large = (a.counts, b.counts) if len(a.counts) <= len(b.counts) else (b.counts, a.counts)
    k = 0
    for ident, c in small.items():
        other = large.get(ident)
        if other is not None:
            k += c * other
    normalized = k / math.sqrt(a.self_kernel * b.self_kernel)
    return min(1.0, max(0.0, 1.0 - normalized))


def features_for_trees(
    trees: list[DependencyTree], config: SyntacticConfig, labels: LabelDictionary | None = None
) -> list[WLFeatureVector]:
    """Single interning pass over a tree sequence, in order."""
    labels = labels if labels is not None else LabelDictionary()
    return [
        wl_features(tree_to_graph(t, config.include_deprel), config.wl_iterations, labels)
        for t in trees
    ]


def normalized_feature_matrix(feats: list[WLFeatureVector], n_labels: int) -> sp.csr_matrix:
    """CSR matrix of unit-normalized feature rows (float64)."""
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for vec in feats:
        scale = 1.0 / math.sqrt(vec.self_kernel)
        for ident in sorted(vec.counts):
            indices.append(ident)
            data.append(vec.counts[ident] * scale)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.array(data), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
        shape=(len(feats), n_labels),
    )


def _subsampled(trees, config: SyntacticConfig):
    rng = np.random.default_rng(config.seed)
    idx = subsample_indices(len(trees), config.max_sentences, rng)
    return [trees[i] for i in idx]


def syntactic_diversity(
    trees: list[DependencyTree],
    config: SyntacticConfig | None = None,
    *,
    corpus_id: str = "",
    workers: int = 1,
) -> DiversityReport:
    """Mean pairwise WL distance over (subsampled) trees, times 100.

    More than ``max_sentences`` trees are first subsampled with the seeded
    generator. The pairwise sum runs over fixed row blocks and is bitwise
    reproducible for any worker count.
    """
    config = config or SyntacticConfig()
    used = _subsampled(trees, config)
    n = len(used)
    if n < 2:
        raise ValidationError(f"need at least 2 trees, have {n}")
    labels = LabelDictionary()
    feats = features_for_trees(used, config, labels)
    unit = normalized_feature_matrix(feats, len(labels))
    total = pair_distance_sum(unit, denom=2.0, workers=workers)
    pairs = n * (n - 1) // 2
    return DiversityReport(
        corpus_id=corpus_id,
        metric="syntactic",
        score=100.0 * total / pairs,
        config=config.to_dict(),
        counts={
            "sentences": n,
            "sentences_available": len(trees),
            "pairs": pairs,
            "wl_labels": len(labels),
        },
    )


def distance_matrix(
    trees: list[DependencyTree], config: SyntacticConfig | None = None, *, workers: int = 1
) -> DistanceMatrix:
    """Full pairwise distance matrix over the (subsampled) trees."""
    config = config or SyntacticConfig()
    used = _subsampled(trees, config)
    n = len(used)
    if n < 2:
        raise ValidationError(f"need at least 2 trees, have {n}")
    labels = LabelDictionary()
    feats = features_for_trees(used, config, labels)
    unit = normalized_feature_matrix(feats, len(labels))
    out = np.empty((n, n), dtype=np.float64)
    pair_distance_sum(unit, denom=2.0, workers=workers, out=out)
    # upper triangle is canonical; mirror it and zero the diagonal exactly
    upper = np.triu(out, 1)
    values = upper + upper.T
    return DistanceMatrix(ids=tuple(t.sentence_id for t in used), values=values)


def write_distance_matrix(matrix: DistanceMatrix, path: str | Path) -> None:
    """Write a distance matrix in the DVEM binary layout (rows = dims = n)."""
    path = Path(path)
    n = len(matrix.ids)
    with path.open("wb") as fh:
        fh.write(_DVEM_HEADER.pack(_DVEM_MAGIC, _DVEM_VERSION, n, n))
        fh.write(np.ascontiguousarray(matrix.values, dtype="<f4").tobytes())
    with sidecar_path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for i, sid in enumerate(matrix.ids):
            fh.write(json.dumps({"row": i, "id": sid}, ensure_ascii=False))
            fh.write("\n")


def load_distance_matrix(path: str | Path) -> DistanceMatrix:
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _DVEM_HEADER.size:
        raise ValidationError(f"{path.name}: file shorter than the DVEM header")
    magic, version, rows, dims = _DVEM_HEADER.unpack_from(blob)
    if magic != _DVEM_MAGIC:
        raise ValidationError(f"{path.name}: bad magic {magic!r}, expected {_DVEM_MAGIC!r}")
    if version != _DVEM_VERSION:
        raise ValidationError(f"{path.name}: unsupported format version {version}")
    if rows != dims:
        raise ValidationError(f"{path.name}: distance matrix must be square, got {rows}x{dims}")
    expected = rows * dims * 4
    actual = len(blob) - _DVEM_HEADER.size
    if actual != expected:
        raise ValidationError(
            f"{path.name}: truncated payload: expected {expected} bytes, got {actual}"
        )
    values = (
        np.frombuffer(blob, dtype="<f4", offset=_DVEM_HEADER.size)
        .reshape(rows, dims)
        .astype(np.float64)
    )
    side = sidecar_path(path)
    if not side.exists():
        raise ValidationError(f"{path.name}: missing id sidecar {side.name}")
    entries: dict[int, str] = {}
    for lineno, line in enumerate(side.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{side.name}: line {lineno}: malformed JSON ({exc.msg})") from exc
        entries[int(rec["row"])] = str(rec["id"])
    if sorted(entries) != list(range(rows)):
        raise ValidationError(f"{side.name}: row indices must cover 0..{rows - 1}")
    return DistanceMatrix(ids=tuple(entries[i] for i in range(rows)), values=values)
