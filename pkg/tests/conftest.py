"""Shared builders for on-disk corpus fixtures."""

import json
from pathlib import Path

import numpy as np

from divscope.corpus_io import (
    ROOT,
    Corpus,
    DependencyTree,
    Document,
    EmbeddingMatrix,
    Token,
    write_conllu,
    write_corpus,
    write_embeddings,
)

FIXTURE_TAGS = ["NOUN", "VERB", "DET", "ADJ", "ADP", "ADV", "PRON", "AUX", "PUNCT", "PROPN"]
FIXTURE_WORDS = [
    "the", "a", "fox", "river", "runs", "jumps", "quiet", "bright", "over",
    "under", "story", "garden", "walks", "cold", "green", "stone", "bird",
    "sings", "slow", "deep",
]


def fixture_tree(rng, sentence_id, size=None):
    n = size or int(rng.poisson(6)) + 2
    heads = [ROOT] + [int(rng.integers(0, i)) for i in range(1, n)]
    upos = [FIXTURE_TAGS[int(rng.integers(len(FIXTURE_TAGS)))] for _ in range(n)]
    forms = [FIXTURE_WORDS[int(rng.integers(len(FIXTURE_WORDS)))] for _ in range(n)]
    deprels = ["root" if h == ROOT else "dep" for h in heads]
    return DependencyTree(
        sentence_id=sentence_id,
        nodes=tuple(Token(form=f, upos=u) for f, u in zip(forms, upos)),
        heads=tuple(heads),
        deprels=tuple(deprels),
    )


def fixture_document(rng, doc_id):
    words = [FIXTURE_WORDS[int(rng.integers(len(FIXTURE_WORDS)))] for _ in range(12)]
    sentence = " ".join(words).capitalize() + "."
    return Document(id=doc_id, text=sentence)


def build_corpus_files(root: Path, name: str, seed: int, *, docs=10, sents=14, dims=6):
    """Write <name>.jsonl / .conllu / .dvem (+ sidecar) and return their paths."""
    rng = np.random.default_rng(seed)
    corpus = Corpus(
        id=name,
        docs=tuple(fixture_document(rng, f"{name}-d{i}") for i in range(docs)),
    )
    trees = [fixture_tree(rng, f"{name}:{i}") for i in range(sents)]
    data = rng.normal(size=(sents, dims)).astype(np.float32)
    emb = EmbeddingMatrix(ids=tuple(t.sentence_id for t in trees), data=data)

    paths = {
        "corpus": root / f"{name}.jsonl",
        "conllu": root / f"{name}.conllu",
        "embeddings": root / f"{name}.dvem",
    }
    write_corpus(corpus, paths["corpus"])
    write_conllu(trees, paths["conllu"])
    write_embeddings(emb, paths["embeddings"])
    return paths


def write_quality_file(path: Path, scores: dict) -> Path:
    path.write_text(json.dumps(scores, sort_keys=True) + "\n", encoding="utf-8")
    return path


def toml_value(value) -> str:
    # json literals for ints, bools, strings, and flat arrays are valid TOML
    return json.dumps(value)


def write_toml_manifest(path: Path, entries, *, metrics=None, blocks=None) -> Path:
    lines = []
    if metrics is not None:
        lines.append(f"metrics = {toml_value(list(metrics))}")
    for block_name, kv in (blocks or {}).items():
        lines.append(f"[{block_name}]")
        for key, value in kv.items():
            lines.append(f"{key} = {toml_value(value)}")
    for entry in entries:
        lines.append("[[entries]]")
        for key, value in entry.items():
            lines.append(f"{key} = {toml_value(value)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_json_manifest(path: Path, entries, *, metrics=None, blocks=None) -> Path:
    payload = dict(blocks or {})
    payload["entries"] = list(entries)
    if metrics is not None:
        payload["metrics"] = list(metrics)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # one verdict line per release-gate test, so a plain -v run ends with
    # a readable acceptance checklist
    verdicts = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            if name.startswith("test_accept_"):
                name = name[len("test_accept_"):]
            verdicts[name] = "PASS" if status == "passed" else "FAIL"
    if verdicts:
        terminalreporter.section("acceptance")
        for name, verdict in verdicts.items():
            terminalreporter.write_line(f"[ACCEPT] {name}: {verdict}")
