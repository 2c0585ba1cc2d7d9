"""Corpus-to-inputs pipeline: JSONL in, CoNLL-U and DVEM out.

Sentence ids are ``<docid>:<k>`` with k counting sentences within the
document, and both outputs are produced from the same segmenter, so their
id sequences match exactly. Files are written to a temp name in the target
directory and renamed into place, so readers never observe a half-written
file. The DVEM sidecar schema has no room for comments, so backend version
stamps live in the CoNLL-U header comments.
"""

from __future__ import annotations

import json
import logging
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .backends import PACKAGE_VERSION, AdapterConfig, AdapterError, load_embedder, load_parser

log = logging.getLogger("divscope_prep")

_DVEM_MAGIC = b"DVEM"
_DVEM_VERSION = 1
_DVEM_HEADER = struct.Struct("<4sIII")


def read_corpus(path: str | Path) -> list[tuple[str, str]]:
    """Read a JSONL corpus as (id, text) pairs, enforcing the primary-input
    contract: one object per line, non-empty unique string ids, string text."""
    path = Path(path)
    docs: list[tuple[str, str]] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AdapterError(f"{path.name}: line {lineno}: malformed JSON ({exc.msg})")
            if not isinstance(rec, dict):
                raise AdapterError(f"{path.name}: line {lineno}: document must be an object")
            doc_id, text = rec.get("id"), rec.get("text")
            if not isinstance(doc_id, str) or not doc_id:
                raise AdapterError(f"{path.name}: line {lineno}: missing or empty 'id'")
            if not isinstance(text, str):
                raise AdapterError(f"{path.name}: line {lineno}: missing 'text'")
            if doc_id in seen:
                raise AdapterError(f"{path.name}: line {lineno}: duplicate id {doc_id!r}")
            seen.add(doc_id)
            docs.append((doc_id, text))
    if not docs:
        raise AdapterError(f"{path.name}: corpus has no documents")
    return docs


def _atomic_write_bytes(path: Path, blob: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _atomic_write_text(path: Path, text: str) -> None:
    _atomic_write_bytes(path, text.encode("utf-8"))


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.stem + ".ids.jsonl")


def parse_corpus(
    corpus: str | Path, out: str | Path, config: AdapterConfig | None = None
) -> dict:
    """Parse every document into CoNLL-U blocks at ``out``.

    Documents the segmenter yields no sentences for (empty or whitespace
    text, or text the parser rejects) are skipped; their ids are logged and
    counted in the returned summary, never dropped silently.
    """
    config = config or AdapterConfig()
    parser = load_parser(config)
    docs = read_corpus(corpus)

    lines = [
        f"# generator = divscope-prep/{PACKAGE_VERSION}",
        f"# parser = {parser.version}",
        f"# language = {config.language}",
        "",
    ]
    sentences = 0
    skipped: list[str] = []
    for doc_id, text in docs:
        parsed = parser.process(text)
        if not parsed:
            skipped.append(doc_id)
            log.warning("document %r produced no sentences; skipped", doc_id)
            continue
        for k, (sentence_text, rows) in enumerate(parsed):
            lines.append(f"# sent_id = {doc_id}:{k}")
            lines.append(f"# text = {sentence_text}")
            for i, (form, upos, head, deprel) in enumerate(rows, start=1):
                lines.append(f"{i}\t{form}\t_\t{upos}\t_\t_\t{head}\t{deprel}\t_\t_")
            lines.append("")
            sentences += 1

    if sentences == 0:
        raise AdapterError("no document produced any sentence")
    out = Path(out)
    _atomic_write_text(out, "\n".join(lines) + "\n")
    return {
        "documents": len(docs),
        "sentences": sentences,
        "skipped": len(skipped),
        "skipped_ids": skipped,
        "parser": parser.version,
    }


def embed_corpus(
    corpus: str | Path, out: str | Path, config: AdapterConfig | None = None
) -> dict:
    """Embed every sentence into a DVEM matrix at ``out`` plus an id sidecar.

    Sentences come from the same segmenter parse_corpus uses, so row ids
    line up with the CoNLL-U sentence ids one to one.
    """
    config = config or AdapterConfig()
    parser = load_parser(config)
    embedder = load_embedder(config)
    docs = read_corpus(corpus)

    ids: list[str] = []
    sentences: list[str] = []
    skipped: list[str] = []
    for doc_id, text in docs:
        segmented = parser.segment(text)
        if not segmented:
            skipped.append(doc_id)
            log.warning("document %r produced no sentences; skipped", doc_id)
            continue
        for k, sentence_text in enumerate(segmented):
            ids.append(f"{doc_id}:{k}")
            sentences.append(sentence_text)

    if not sentences:
        raise AdapterError("no document produced any sentence")
    chunks = [
        embedder.encode(sentences[start : start + config.batch_size])
        for start in range(0, len(sentences), config.batch_size)
    ]
    data = np.concatenate(chunks, axis=0)
    for row, sid in enumerate(ids):
        if not np.isfinite(data[row]).all():
            raise AdapterError(f"non-finite embedding for sentence {sid!r}")

    out = Path(out)
    header = _DVEM_HEADER.pack(_DVEM_MAGIC, _DVEM_VERSION, len(ids), embedder.dims)
    _atomic_write_bytes(out, header + np.ascontiguousarray(data, dtype="<f4").tobytes())
    side_lines = [
        json.dumps({"row": row, "id": sid}, ensure_ascii=False) for row, sid in enumerate(ids)
    ]
    _atomic_write_text(sidecar_path(out), "\n".join(side_lines) + "\n")
    return {
        "documents": len(docs),
        "sentences": len(ids),
        "skipped": len(skipped),
        "skipped_ids": skipped,
        "dims": embedder.dims,
        "embedder": embedder.version,
    }
