"""Multi-corpus benchmark runs, metric tables, correlations, plot data.

A run manifest lists corpora with their preprocessed inputs; the benchmark
fills a (corpus x metric) table, isolating per-cell failures so one bad
input cannot void the run. Downstream helpers correlate metric columns and
emit long-format plot data.
"""

from __future__ import annotations

import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus_io import (
    METRICS,
    ValidationError,
    load_conllu,
    load_corpus,
    load_embeddings,
)
from .lexical import LexicalConfig, lexical_diversity
from .semantic import SemanticConfig, semantic_diversity
from .syntactic import SyntacticConfig, syntactic_diversity

METRIC_ORDER = ("lexical", "syntactic", "semantic")
ROLES = frozenset({"human", "model", "input"})


@dataclass(frozen=True)
class ManifestEntry:
    corpus_id: str
    role: str
    corpus: Path | None = None
    conllu: Path | None = None
    embeddings: Path | None = None
    quality: Path | None = None
    task: str = ""

    def __post_init__(self) -> None:
        if not self.corpus_id:
            raise ValidationError("entry corpus_id must be non-empty")
        if self.role not in ROLES:
            raise ValidationError(
                f"entry {self.corpus_id!r}: role must be one of {sorted(ROLES)}, got {self.role!r}"
            )

    def path_for(self, metric: str) -> Path | None:
        return {"lexical": self.corpus, "syntactic": self.conllu, "semantic": self.embeddings}[
            metric
        ]


@dataclass(frozen=True)
class RunManifest:
    entries: tuple[ManifestEntry, ...]
    metrics: tuple[str, ...] = METRIC_ORDER
    lexical: LexicalConfig = LexicalConfig()
    syntactic: SyntacticConfig = SyntacticConfig()
    semantic: SemanticConfig = SemanticConfig()

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValidationError("manifest needs at least one entry")
        if not self.metrics:
            raise ValidationError("manifest requests no metrics")
        for metric in self.metrics:
            if metric not in METRICS:
                raise ValidationError(f"unknown metric {metric!r}")
        ids = [e.corpus_id for e in self.entries]
        if len(set(ids)) != len(ids):
            dupe = next(i for i in ids if ids.count(i) > 1)
            raise ValidationError(f"duplicate corpus_id {dupe!r}")

    def validate_paths(self) -> None:
        """Check every referenced file before any computation starts."""
        field = {"lexical": "corpus", "syntactic": "conllu", "semantic": "embeddings"}
        for entry in self.entries:
            for metric in self.metrics:
                path = entry.path_for(metric)
                if path is None:
                    raise ValidationError(
                        f"entry {entry.corpus_id!r}: missing {field[metric]} path "
                        f"required by the {metric} metric"
                    )
                if not path.exists():
                    raise ValidationError(
                        f"entry {entry.corpus_id!r}: {field[metric]} path {path} does not exist"
                    )
            if entry.quality is not None and not entry.quality.exists():
                raise ValidationError(
                    f"entry {entry.corpus_id!r}: quality path {entry.quality} does not exist"
                )


def load_manifest(path: str | Path) -> RunManifest:
    """Parse a TOML or JSON manifest; relative paths resolve against it."""
    path = Path(path)
    if path.suffix == ".json":
        raw = json.loads(path.read_text(encoding="utf-8"))
    else:
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    if not isinstance(raw, dict):
        raise ValidationError(f"{path.name}: manifest must be a table / object")

    base = path.parent

    def resolve(entry: dict, key: str) -> Path | None:
        value = entry.get(key)
        return None if value is None else (base / str(value))

    entries = []
    for i, item in enumerate(raw.get("entries", [])):
        if not isinstance(item, dict):
            raise ValidationError(f"{path.name}: entry {i} must be a table / object")
        entries.append(
            ManifestEntry(
                corpus_id=str(item.get("corpus_id", "")),
                role=str(item.get("role", "")),
                corpus=resolve(item, "corpus"),
                conllu=resolve(item, "conllu"),
                embeddings=resolve(item, "embeddings"),
                quality=resolve(item, "quality"),
                task=str(item.get("task", "")),
            )
        )

    def config(cls, name: str):
        block = raw.get(name, {})
        if not isinstance(block, dict):
            raise ValidationError(f"{path.name}: [{name}] must be a table / object")
        block = dict(block)
        if "ns" in block:
            block["ns"] = tuple(block["ns"])
        try:
            return cls(**block)
        except TypeError as exc:
            raise ValidationError(f"{path.name}: bad [{name}] config: {exc}") from exc

    return RunManifest(
        entries=tuple(entries),
        metrics=tuple(raw.get("metrics", METRIC_ORDER)),
        lexical=config(LexicalConfig, "lexical"),
        syntactic=config(SyntacticConfig, "syntactic"),
        semantic=config(SemanticConfig, "semantic"),
    )


# ---------------------------------------------------------------------------
# metric table


@dataclass(frozen=True)
class MetricCell:
    corpus_id: str
    metric: str
    score: float | None
    error: str | None = None
    report: dict | None = None

    def __post_init__(self) -> None:
        if self.metric not in METRICS:
            raise ValidationError(f"unknown metric {self.metric!r}")
        if (self.score is None) == (self.error is None):
            raise ValidationError("cell needs exactly one of score or error")


@dataclass(frozen=True)
class MetricTable:
    rows: tuple[MetricCell, ...]

    def __post_init__(self) -> None:
        keys = [(c.corpus_id, c.metric) for c in self.rows]
        if len(set(keys)) != len(keys):
            raise ValidationError("duplicate (corpus_id, metric) cell")

    @property
    def corpus_ids(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for cell in self.rows:
            seen.setdefault(cell.corpus_id, None)
        return tuple(seen)

    @property
    def metrics(self) -> tuple[str, ...]:
        present = {c.metric for c in self.rows}
        return tuple(m for m in METRIC_ORDER if m in present)

    def get(self, corpus_id: str, metric: str) -> MetricCell | None:
        for cell in self.rows:
            if cell.corpus_id == corpus_id and cell.metric == metric:
                return cell
        return None

    def column(self, metric: str) -> dict[str, float]:
        return {
            c.corpus_id: c.score for c in self.rows if c.metric == metric and c.score is not None
        }

    @property
    def has_holes(self) -> bool:
        return any(c.error is not None for c in self.rows)

    def to_dict(self) -> dict:
        return {
            "rows": [
                {
                    "corpus_id": c.corpus_id,
                    "metric": c.metric,
                    "score": c.score,
                    "error": c.error,
                    "report": c.report,
                }
                for c in self.rows
            ]
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "MetricTable":
        return cls(
            rows=tuple(
                MetricCell(
                    corpus_id=row["corpus_id"],
                    metric=row["metric"],
                    score=row["score"],
                    error=row.get("error"),
                    report=row.get("report"),
                )
                for row in raw["rows"]
            )
        )


def write_metric_table(table: MetricTable, json_path: str | Path, csv_path: str | Path) -> None:
    """Serialize a table as canonical JSON plus a wide CSV (one metric column each)."""
    Path(json_path).write_text(
        json.dumps(table.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
        newline="\n",
    )
    metrics = table.metrics
    lines = ["corpus_id," + ",".join(metrics)]
    for corpus_id in table.corpus_ids:
        cells = []
        for metric in metrics:
            cell = table.get(corpus_id, metric)
            cells.append("" if cell is None or cell.score is None else repr(cell.score))
        lines.append(corpus_id + "," + ",".join(cells))
    Path(csv_path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_metric_table(path: str | Path) -> MetricTable:
    return MetricTable.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# benchmark run


def _run_cell(entry: ManifestEntry, metric: str, manifest: RunManifest) -> MetricCell:
    try:
        if metric == "lexical":
            report = lexical_diversity(load_corpus(entry.corpus), manifest.lexical)
        elif metric == "syntactic":
            report = syntactic_diversity(
                load_conllu(entry.conllu), manifest.syntactic, corpus_id=entry.corpus_id
            )
        else:
            report = semantic_diversity(
                load_embeddings(entry.embeddings), manifest.semantic, corpus_id=entry.corpus_id
            )
    except Exception as exc:
        return MetricCell(corpus_id=entry.corpus_id, metric=metric, score=None, error=str(exc))
    report_dict = report.to_dict()
    report_dict["corpus_id"] = entry.corpus_id
    return MetricCell(
        corpus_id=entry.corpus_id, metric=metric, score=report.score, report=report_dict
    )


def run_benchmark(manifest: RunManifest, *, workers: int = 1) -> MetricTable:
    """Fill every (entry, requested metric) cell; failures become holes.

    Validation runs up front and raises before any metric computation. Cell
    order is entry order crossed with the manifest's metric order, so output
    files are stable for a fixed manifest.
    """
    manifest.validate_paths()
    cells = [(entry, metric) for entry in manifest.entries for metric in manifest.metrics]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda em: _run_cell(em[0], em[1], manifest), cells))
    else:
        rows = [_run_cell(entry, metric, manifest) for entry, metric in cells]
    return MetricTable(rows=tuple(rows))


# ---------------------------------------------------------------------------
# correlations


def pearson(x, y) -> float:
    """Product-moment correlation, clamped to [-1, 1] against rounding."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ValidationError("need at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    ssx = float(dx @ dx)
    ssy = float(dy @ dy)
    if ssx == 0.0 or ssy == 0.0:
        raise ValidationError("zero variance")
    r = float(dx @ dy) / math.sqrt(ssx * ssy)
    return min(1.0, max(-1.0, r))


def read_quality_vectors(manifest: RunManifest) -> dict[str, dict[str, float]]:
    """Per-entry quality JSON files merged into name -> corpus_id -> score."""
    out: dict[str, dict[str, float]] = {}
    for entry in manifest.entries:
        if entry.quality is None:
            continue
        raw = json.loads(entry.quality.read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ValidationError(f"{entry.quality.name}: quality file must be an object")
        for name, value in raw.items():
            out.setdefault(str(name), {})[entry.corpus_id] = float(value)
    return out


def correlation_matrix(
    table: MetricTable, quality: dict[str, dict[str, float]] | None = None
):
    """Pairwise Pearson over metric (and quality) columns.

    Each pair correlates over the corpus_ids both columns cover; pairs with
    fewer than 2 shared points or zero variance are left undefined (NaN)
    rather than failing the matrix. Defined diagonal cells are exactly 1.
    """
    id_order = table.corpus_ids
    columns: dict[str, dict[str, float]] = {m: table.column(m) for m in table.metrics}
    for name in sorted(quality or {}):
        columns[f"quality:{name}"] = (quality or {})[name]
    labels = list(columns)
    k = len(labels)
    matrix = np.full((k, k), np.nan)

    def shared_values(a: str, b: str):
        ca, cb = columns[a], columns[b]
        ids = [i for i in id_order if i in ca and i in cb]
        extra = sorted(set(ca) & set(cb) - set(id_order))
        ids += extra
        return [ca[i] for i in ids], [cb[i] for i in ids]

    for i in range(k):
        for j in range(i, k):
            xs, ys = shared_values(labels[i], labels[j])
            try:
                if i == j:
                    pearson(xs, xs)
                    r = 1.0
                else:
                    r = pearson(xs, ys)
            except ValidationError:
                continue
            matrix[i, j] = r
            matrix[j, i] = r
    return labels, matrix


def write_correlation_csv(labels, matrix: np.ndarray, path: str | Path) -> None:
    lines = ["," + ",".join(labels)]
    for i, label in enumerate(labels):
        cells = [
            "" if math.isnan(matrix[i, j]) else repr(float(matrix[i, j]))
            for j in range(len(labels))
        ]
        lines.append(label + "," + ",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# plot data


def emit_plot_data(table: MetricTable, manifest: RunManifest, path: str | Path) -> None:
    """Long-format CSV (task, corpus_id, role, metric, score) for plotting.

    Roles pass through so a renderer can draw model points against human /
    input baselines. Hole cells are omitted; scores round-trip via repr.
    """
    if not table.rows:
        raise ValidationError("empty metric table")
    roles = {e.corpus_id: e for e in manifest.entries}
    lines = ["task,corpus_id,role,metric,score"]
    for cell in table.rows:
        if cell.score is None:
            continue
        entry = roles.get(cell.corpus_id)
        if entry is None:
            warnings.warn(f"table corpus {cell.corpus_id!r} missing from manifest; skipped")
            continue
        lines.append(
            ",".join([entry.task, cell.corpus_id, entry.role, cell.metric, repr(cell.score)])
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
