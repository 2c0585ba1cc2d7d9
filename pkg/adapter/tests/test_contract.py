"""Cross-package contract: adapter outputs must be valid measurement inputs.

These tests import the measurement package and feed it files this adapter
produced, so they need both packages installed. They run on the built-in
deterministic backends; neural backends speak the same formats through the
same writer code paths.
"""

import json
import warnings

import pytest

from divscope.corpus_io import load_conllu, load_corpus, load_embeddings
from divscope.lexical import lexical_diversity
from divscope.semantic import semantic_diversity
from divscope.syntactic import syntactic_diversity

from conftest import write_english_corpus
from divscope_prep.backends import AdapterConfig
from divscope_prep.pipeline import embed_corpus, parse_corpus

CONFIG = AdapterConfig(parser_model="rule", embedder_model="hash:32")


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    root = tmp_path_factory.mktemp("contract")
    corpus = write_english_corpus(root / "corpus.jsonl", n_docs=100, seed=7)
    parse_summary = parse_corpus(corpus, root / "corpus.conllu", CONFIG)
    embed_summary = embed_corpus(corpus, root / "corpus.dvem", CONFIG)
    return {
        "root": root,
        "corpus": corpus,
        "conllu": root / "corpus.conllu",
        "dvem": root / "corpus.dvem",
        "parse": parse_summary,
        "embed": embed_summary,
    }


def test_contract_outputs_pass_primary_validation(artifacts):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        trees = load_conllu(artifacts["conllu"])
        emb = load_embeddings(artifacts["dvem"])
    assert [str(w.message) for w in caught] == []
    assert len(trees) == artifacts["parse"]["sentences"]
    assert emb.data.shape == (artifacts["embed"]["sentences"], 32)
    assert artifacts["parse"]["skipped"] == 0


def test_contract_sentence_ids_align(artifacts):
    trees = load_conllu(artifacts["conllu"])
    emb = load_embeddings(artifacts["dvem"])
    assert [t.sentence_id for t in trees] == list(emb.ids)


def test_contract_primary_metrics_run_end_to_end(artifacts):
    scores = {
        "lexical": lexical_diversity(load_corpus(artifacts["corpus"])).score,
        "syntactic": syntactic_diversity(load_conllu(artifacts["conllu"])).score,
        "semantic": semantic_diversity(load_embeddings(artifacts["dvem"])).score,
    }
    for name, score in scores.items():
        assert 0.0 <= score <= 100.0, name


def test_contract_repeated_sentence_has_zero_semantic_spread(tmp_path):
    corpus = tmp_path / "twice.jsonl"
    corpus.write_text(
        json.dumps({"id": "a", "text": "Same words here. Same words here."}) + "\n",
        encoding="utf-8",
    )
    embed_corpus(corpus, tmp_path / "twice.dvem", CONFIG)
    assert semantic_diversity(load_embeddings(tmp_path / "twice.dvem")).score == 0.0
