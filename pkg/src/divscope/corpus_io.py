"""Data model and on-disk formats.

Everything the metric modules consume is defined and validated here:

* corpora as UTF-8 JSONL, one ``{"id": ..., "text": ...}`` record per line,
* dependency parses as 10-column CoNLL-U with ``# sent_id`` comments,
* embedding matrices as DVEM binary files with a JSONL id sidecar,
* diversity reports as JSON with a CSV projection.

Writers emit a canonical form that the matching loader round-trips byte for
byte. Loaders never yield an invalid structure: all invariants are enforced at
construction time.
"""

from __future__ import annotations

import json
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

#: The closed Universal Dependencies part-of-speech inventory.
UPOS_TAGS = frozenset({
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
})

#: Head sentinel marking the root token of a dependency tree.
ROOT = -1

METRICS = ("lexical", "syntactic", "semantic")

_DVEM_MAGIC = b"DVEM"
_DVEM_VERSION = 1
_DVEM_HEADER = struct.Struct("<4sIII")


class ValidationError(ValueError):
    """An input file or in-memory structure breaks a format contract."""


@dataclass(frozen=True)
class Token:
    """One token: surface form plus UPOS tag from the closed tag set."""

    form: str
    upos: str

    def __post_init__(self) -> None:
        if not self.form:
            raise ValidationError("token form must be non-empty")
        if self.upos not in UPOS_TAGS:
            raise ValidationError(f"unknown UPOS tag {self.upos!r}")


@dataclass(frozen=True)
class Document:
    """One corpus document; ``tokens`` may carry a pre-tokenized sequence."""

    id: str
    text: str
    tokens: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("document id must be non-empty")
        if not self.text.strip():
            raise ValidationError(f"document {self.id!r}: empty text")


@dataclass(frozen=True)
class Corpus:
    """Ordered document collection; order is load order and is stable."""

    id: str
    docs: tuple[Document, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for doc in self.docs:
            if doc.id in seen:
                raise ValidationError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.docs)


@dataclass(frozen=True)
class DependencyTree:
    """One sentence parse: tokens, 0-based head indices, relation labels.

    ``heads[i]`` is the parent position of token ``i``; the single root
    carries the sentinel :data:`ROOT`. The head sequence must form a tree.
    """

    sentence_id: str
    nodes: tuple[Token, ...]
    heads: tuple[int, ...]
    deprels: tuple[str, ...]

    def __post_init__(self) -> None:
        n = len(self.nodes)
        if n == 0:
            raise ValidationError(f"sentence {self.sentence_id!r}: no tokens")
        if len(self.heads) != n or len(self.deprels) != n:
            raise ValidationError(
                f"sentence {self.sentence_id!r}: nodes/heads/deprels lengths differ"
            )
        for i, h in enumerate(self.heads):
            if h != ROOT and not 0 <= h < n:
                raise ValidationError(
                    f"sentence {self.sentence_id!r}: head index {h} out of range at token {i + 1}"
                )
            if h == i:
                raise ValidationError(
                    f"sentence {self.sentence_id!r}: cyclic heads at token {i + 1}"
                )
        # cycle check first: a rootless block is a cycle, not a root-count issue
        state = [0] * n  # 0 unvisited, 1 on current path, 2 done
        for start in range(n):
            path = []
            i = start
            while i != ROOT and state[i] == 0:
                state[i] = 1
                path.append(i)
                i = self.heads[i]
            if i != ROOT and state[i] == 1:
                raise ValidationError(
                    f"sentence {self.sentence_id!r}: cyclic heads at token {i + 1}"
                )
            for j in path:
                state[j] = 2
        roots = [i for i, h in enumerate(self.heads) if h == ROOT]
        if len(roots) != 1:
            raise ValidationError(
                f"sentence {self.sentence_id!r}: expected exactly one root, found {len(roots)}"
            )

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def upos(self) -> tuple[str, ...]:
        return tuple(tok.upos for tok in self.nodes)


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """Row-per-sentence dense float32 vectors with stable string ids."""

    ids: tuple[str, ...]
    data: np.ndarray

    def __post_init__(self) -> None:
        if self.data.ndim != 2:
            raise ValidationError("embedding data must be a 2-D matrix")
        if self.data.dtype != np.float32:
            object.__setattr__(self, "data", self.data.astype(np.float32))
        if len(self.ids) != self.data.shape[0]:
            raise ValidationError(
                f"ids count {len(self.ids)} != rows {self.data.shape[0]}"
            )
        if len(set(self.ids)) != len(self.ids):
            raise ValidationError("embedding ids must be unique")
        if self.data.size and not np.isfinite(self.data).all():
            bad = int(np.argwhere(~np.isfinite(self.data).all(axis=1))[0, 0])
            raise ValidationError(f"non-finite value in embedding row {bad}")
        if self.data.size:
            norms = np.linalg.norm(self.data, axis=1)
            if (norms == 0.0).any():
                bad = int(np.argmax(norms == 0.0))
                raise ValidationError(f"all-zero embedding row {bad}")

    @property
    def dims(self) -> int:
        return int(self.data.shape[1])

    def __len__(self) -> int:
        return int(self.data.shape[0])


@dataclass(frozen=True)
class DiversityReport:
    """One metric score on the 0-100 scale plus reproduction provenance.

    ``config`` holds every parameter needed to reproduce ``score`` bit for
    bit; ``counts`` records what was measured (documents, grams, pairs, ...).
    """

    corpus_id: str
    metric: str
    score: float
    config: dict
    counts: dict

    def __post_init__(self) -> None:
        if self.metric not in METRICS:
            raise ValidationError(f"unknown metric {self.metric!r}")
        if not 0.0 <= self.score <= 100.0:
            raise ValidationError(f"score {self.score!r} outside [0, 100]")

    def to_dict(self) -> dict:
        return {
            "corpus_id": self.corpus_id,
            "metric": self.metric,
            "score": self.score,
            "config": self.config,
            "counts": self.counts,
        }


# ---------------------------------------------------------------------------
# corpora


def load_corpus(path: str | Path) -> Corpus:
    """Read a JSONL corpus, preserving line order.

    Each non-blank line must be a JSON object with string fields ``id`` and
    ``text``; an optional ``meta`` object is ignored. Malformed lines,
    duplicate ids, and empty texts are reported with their line number.
    """
    path = Path(path)
    docs: list[Document] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(
                    f"{path.name}: line {lineno}: malformed JSON ({exc.msg})"
                ) from exc
            if not isinstance(rec, dict) or "id" not in rec or "text" not in rec:
                raise ValidationError(
                    f"{path.name}: line {lineno}: record needs 'id' and 'text' fields"
                )
            doc_id, text = str(rec["id"]), str(rec["text"])
            if doc_id in seen:
                raise ValidationError(
                    f"{path.name}: line {lineno}: duplicate document id {doc_id!r}"
                )
            if not text.strip():
                raise ValidationError(
                    f"{path.name}: line {lineno}: empty text for document {doc_id!r}"
                )
            seen.add(doc_id)
            docs.append(Document(id=doc_id, text=text))
    return Corpus(id=path.stem, docs=tuple(docs))


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus in the canonical JSONL form ``load_corpus`` round-trips."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for doc in corpus.docs:
            fh.write(json.dumps({"id": doc.id, "text": doc.text}, ensure_ascii=False))
            fh.write("\n")


# ---------------------------------------------------------------------------
# sentence splitting


_TERMINALS = ".!?"


def split_sentences(doc: Document) -> list[str]:
    """Split a document into sentences with a deterministic rule.

    A boundary is a run of sentence-final marks (``. ! ?``) followed by
    whitespace and an uppercase letter, or by end of text. The rule never
    splits inside a token; a document with no boundary is returned whole.
    """
    text = doc.text
    n = len(text)
    out: list[str] = []
    start = 0
    i = 0
    while i < n:
        if text[i] in _TERMINALS:
            j = i + 1
            while j < n and text[j] in _TERMINALS:
                j += 1
            k = j
            while k < n and text[k].isspace():
                k += 1
            if k == n or (k > j and text[k].isupper()):
                segment = text[start:j].strip()
                if segment:
                    out.append(segment)
                start = k
                i = k
                continue
            i = j
        else:
            i += 1
    tail = text[start:].strip()
    if tail:
        out.append(tail)
    if not out:
        out.append(text.strip())
    return out


# ---------------------------------------------------------------------------
# CoNLL-U


def load_conllu(path: str | Path) -> list[DependencyTree]:
    """Parse a CoNLL-U file into validated dependency trees.

    Sentences are blank-line separated blocks, each carrying a
    ``# sent_id = ...`` comment. Multiword-token ranges (``3-4``) and empty
    nodes (``5.1``) are skipped. Head indices are converted from the 1-based
    file convention (0 = root) to 0-based with :data:`ROOT` for the root.
    UPOS tags outside the closed set are mapped to ``X`` with a warning.
    """
    path = Path(path)
    trees: list[DependencyTree] = []
    sent_id: str | None = None
    rows: list[tuple[str, str, int, str]] = []  # form, upos, head, deprel
    block_line = 0

    def flush(lineno: int) -> None:
        nonlocal sent_id, rows
        if not rows and sent_id is None:
            return
        if sent_id is None:
            raise ValidationError(
                f"{path.name}: sentence block ending at line {lineno} has no '# sent_id' comment"
            )
        if not rows:
            raise ValidationError(f"{path.name}: sentence {sent_id!r} has no token rows")
        n = len(rows)
        heads: list[int] = []
        for idx, (_, _, head, _) in enumerate(rows, start=1):
            if head == 0:
                heads.append(ROOT)
            elif 1 <= head <= n:
                heads.append(head - 1)
            else:
                raise ValidationError(
                    f"{path.name}: sentence {sent_id!r}: head index {head} out of range at token {idx}"
                )
        try:
            tree = DependencyTree(
                sentence_id=sent_id,
                nodes=tuple(Token(form=f, upos=u) for f, u, _, _ in rows),
                heads=tuple(heads),
                deprels=tuple(d for _, _, _, d in rows),
            )
        except ValidationError as exc:
            raise ValidationError(f"{path.name}: {exc}") from exc
        trees.append(tree)
        sent_id = None
        rows = []

    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                flush(lineno)
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("sent_id"):
                    _, _, value = body.partition("=")
                    sent_id = value.strip()
                    block_line = lineno
                continue
            cols = line.split("\t")
            if len(cols) != 10:
                raise ValidationError(
                    f"{path.name}: line {lineno}: expected 10 columns, got {len(cols)}"
                )
            tok_id = cols[0]
            if "-" in tok_id or "." in tok_id:
                continue  # multiword range or empty node
            upos = cols[3]
            if upos not in UPOS_TAGS:
                warnings.warn(
                    f"{path.name}: line {lineno}: unknown UPOS {upos!r}, using 'X'",
                    stacklevel=2,
                )
                upos = "X"
            try:
                head = int(cols[6])
            except ValueError as exc:
                raise ValidationError(
                    f"{path.name}: line {lineno}: non-integer head {cols[6]!r}"
                ) from exc
            rows.append((cols[1], upos, head, cols[7]))
        flush(block_line + 1)
    return trees


def write_conllu(trees: Sequence[DependencyTree], path: str | Path) -> None:
    """Write trees in the canonical CoNLL-U form ``load_conllu`` round-trips."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for tree in trees:
            fh.write(f"# sent_id = {tree.sentence_id}\n")
            for i, tok in enumerate(tree.nodes):
                head = 0 if tree.heads[i] == ROOT else tree.heads[i] + 1
                fh.write(
                    f"{i + 1}\t{tok.form}\t_\t{tok.upos}\t_\t_\t{head}\t{tree.deprels[i]}\t_\t_\n"
                )
            fh.write("\n")


# ---------------------------------------------------------------------------
# embeddings (DVEM binary format)


def sidecar_path(path: str | Path) -> Path:
    """Id-sidecar path for a DVEM file: ``emb.dvem`` -> ``emb.ids.jsonl``."""
    path = Path(path)
    return path.with_name(path.stem + ".ids.jsonl")


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    """Read a DVEM embedding file plus its id sidecar.

    Layout: magic ``DVEM``, three little-endian uint32 (format version = 1,
    rows, dims), then rows x dims little-endian float32, row-major. The
    sidecar holds one ``{"row": int, "id": str}`` JSON object per line.
    """
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _DVEM_HEADER.size:
        raise ValidationError(f"{path.name}: file shorter than the DVEM header")
    magic, version, rows, dims = _DVEM_HEADER.unpack_from(blob)
    if magic != _DVEM_MAGIC:
        raise ValidationError(f"{path.name}: bad magic {magic!r}, expected {_DVEM_MAGIC!r}")
    if version != _DVEM_VERSION:
        raise ValidationError(f"{path.name}: unsupported format version {version}")
    expected = rows * dims * 4
    actual = len(blob) - _DVEM_HEADER.size
    if actual != expected:
        raise ValidationError(
            f"{path.name}: truncated payload: expected {expected} bytes, got {actual}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=_DVEM_HEADER.size).reshape(rows, dims).copy()

    side = sidecar_path(path)
    if not side.exists():
        raise ValidationError(f"{path.name}: missing id sidecar {side.name}")
    entries: dict[int, str] = {}
    with side.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(
                    f"{side.name}: line {lineno}: malformed JSON ({exc.msg})"
                ) from exc
            entries[int(rec["row"])] = str(rec["id"])
    if len(entries) != rows:
        raise ValidationError(
            f"{side.name}: ids count {len(entries)} != rows {rows}"
        )
    if sorted(entries) != list(range(rows)):
        raise ValidationError(f"{side.name}: row indices must cover 0..{rows - 1}")
    ids = tuple(entries[i] for i in range(rows))
    try:
        return EmbeddingMatrix(ids=ids, data=data)
    except ValidationError as exc:
        raise ValidationError(f"{path.name}: {exc}") from exc


def write_embeddings(emb: EmbeddingMatrix, path: str | Path) -> None:
    """Write a DVEM file and its id sidecar in canonical form."""
    path = Path(path)
    rows, dims = emb.data.shape
    with path.open("wb") as fh:
        fh.write(_DVEM_HEADER.pack(_DVEM_MAGIC, _DVEM_VERSION, rows, dims))
        fh.write(np.ascontiguousarray(emb.data, dtype="<f4").tobytes())
    with sidecar_path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for i, sid in enumerate(emb.ids):
            fh.write(json.dumps({"row": i, "id": sid}, ensure_ascii=False))
            fh.write("\n")


# ---------------------------------------------------------------------------
# reports


def write_report(report: DiversityReport, path: str | Path) -> None:
    """Write a report as canonical JSON (sorted keys, 2-space indent)."""
    Path(path).write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
        newline="\n",
    )


def load_report(path: str | Path) -> DiversityReport:
    """Read a report written by :func:`write_report`."""
    rec = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return DiversityReport(
            corpus_id=str(rec["corpus_id"]),
            metric=str(rec["metric"]),
            score=float(rec["score"]),
            config=dict(rec["config"]),
            counts=dict(rec["counts"]),
        )
    except KeyError as exc:
        raise ValidationError(f"{Path(path).name}: missing report field {exc}") from exc


def write_report_csv(reports: Iterable[DiversityReport], path: str | Path) -> None:
    """CSV projection of reports: one ``corpus_id,metric,score`` row each."""
    lines = ["corpus_id,metric,score"]
    for rep in reports:
        lines.append(f"{rep.corpus_id},{rep.metric},{rep.score!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
