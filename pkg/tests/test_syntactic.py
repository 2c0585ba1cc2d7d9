"""Tree-kernel distances and the syntactic diversity score."""

import math

import numpy as np
import pytest

from divscope.corpus_io import ROOT, DependencyTree, Token, ValidationError
from divscope.syntactic import (
    DistanceMatrix,
    LabelDictionary,
    SyntacticConfig,
    WLFeatureVector,
    distance_matrix,
    features_for_trees,
    load_distance_matrix,
    normalized_feature_matrix,
    syntactic_diversity,
    tree_to_graph,
    wl_distance,
    wl_features,
    write_distance_matrix,
)

from oracles import wl_string_distance

TAGS = ["NOUN", "VERB", "DET", "ADJ", "ADP", "ADV", "PRON", "AUX", "PUNCT", "PROPN"]


def make_tree(upos, heads, *, sentence_id="s0", deprels=None):
    n = len(upos)
    deprels = deprels or tuple("dep" if h != ROOT else "root" for h in heads)
    return DependencyTree(
        sentence_id=sentence_id,
        nodes=tuple(Token(form=f"w{i}", upos=u) for i, u in enumerate(upos)),
        heads=tuple(heads),
        deprels=tuple(deprels),
    )


def random_tree(rng, sentence_id, size=None):
    n = size or int(rng.poisson(6)) + 1
    heads = [ROOT] + [int(rng.integers(0, i)) for i in range(1, n)]
    upos = [TAGS[int(rng.integers(len(TAGS)))] for _ in range(n)]
    return make_tree(tuple(upos), tuple(heads), sentence_id=sentence_id)


def tree_edges(tree):
    return [(i, h) for i, h in enumerate(tree.heads) if h != ROOT]


DET_NOUN = make_tree(("DET", "NOUN"), (1, ROOT))
LONE_NOUN = make_tree(("NOUN",), (ROOT,))


# --- graphs ----------------------------------------------------------------


def test_tree_to_graph_basic():
    g = tree_to_graph(make_tree(("DET", "NOUN", "VERB"), (1, 2, ROOT)))
    assert g.labels == ["DET", "NOUN", "VERB"]
    assert g.adj[0] == [1]
    assert sorted(g.adj[1]) == [0, 2]
    assert g.adj[2] == [1]
    assert g.edge_labels is None


def test_tree_to_graph_handshake():
    rng = np.random.default_rng(7)
    g = tree_to_graph(random_tree(rng, "s", size=20))
    # n - 1 edges, each contributing two adjacency entries
    assert sum(len(a) for a in g.adj) == 38


def test_tree_to_graph_deprel_edges():
    t = make_tree(("DET", "NOUN"), (1, ROOT), deprels=("det", "root"))
    g = tree_to_graph(t, include_deprel=True)
    assert g.edge_labels is not None
    assert g.edge_labels[0] == ["det"]
    assert g.edge_labels[1] == ["det"]


# --- feature vectors -------------------------------------------------------


def test_wl_features_pair_anchor():
    labels = LabelDictionary()
    a = wl_features(tree_to_graph(DET_NOUN), 1, labels)
    b = wl_features(tree_to_graph(LONE_NOUN), 1, labels)
    assert a.counts == {0: 1, 1: 1, 2: 1, 3: 1}
    assert a.self_kernel == 4
    assert b.self_kernel == 2
    assert set(b.counts) == {1, 4}
    assert len(labels) == 5


def test_wl_distance_anchor():
    labels = LabelDictionary()
    a = wl_features(tree_to_graph(DET_NOUN), 1, labels)
    b = wl_features(tree_to_graph(LONE_NOUN), 1, labels)
    assert abs(wl_distance(a, b) - (1.0 - 1.0 / math.sqrt(8.0))) < 1e-12


def test_wl_distance_identical_trees_zero():
    labels = LabelDictionary()
    t = make_tree(("DET", "ADJ", "NOUN", "VERB"), (2, 2, 3, ROOT))
    u = make_tree(("DET", "ADJ", "NOUN", "VERB"), (2, 2, 3, ROOT), sentence_id="s1")
    a, b = features_for_trees([t, u], SyntacticConfig(), labels)
    assert a.counts == b.counts
    assert wl_distance(a, b) == 0.0


def test_wl_distance_disjoint_labels_one():
    labels = LabelDictionary()
    a = wl_features(tree_to_graph(make_tree(("NOUN", "NOUN"), (1, ROOT))), 2, labels)
    b = wl_features(tree_to_graph(make_tree(("VERB", "VERB"), (1, ROOT))), 2, labels)
    assert wl_distance(a, b) == 1.0


def test_isomorphism_invariance():
    # same tree with nodes listed in a different order
    t = make_tree(("DET", "ADJ", "NOUN"), (2, 2, ROOT))
    u = make_tree(("NOUN", "DET", "ADJ"), (ROOT, 0, 0), sentence_id="s1")
    labels = LabelDictionary()
    a, b = features_for_trees([t, u], SyntacticConfig(wl_iterations=3), labels)
    assert a.counts == b.counts
    assert wl_distance(a, b) == 0.0


@pytest.mark.parametrize("h", [0, 1, 2, 3])
def test_string_oracle_agreement(h):
    rng = np.random.default_rng(100 + h)
    labels = LabelDictionary()
    trees = [random_tree(rng, f"s{i}") for i in range(20)]
    feats = features_for_trees(trees, SyntacticConfig(wl_iterations=h), labels)
    for _ in range(50):
        i, j = rng.integers(0, len(trees), size=2)
        got = wl_distance(feats[i], feats[j])
        want = wl_string_distance(
            [tok.upos for tok in trees[i].nodes],
            tree_edges(trees[i]),
            [tok.upos for tok in trees[j].nodes],
            tree_edges(trees[j]),
            h,
        )
        assert abs(got - want) < 1e-12


def test_wl_distance_bounds_and_symmetry():
    rng = np.random.default_rng(3)
    labels = LabelDictionary()
    feats = features_for_trees(
        [random_tree(rng, f"s{i}") for i in range(30)], SyntacticConfig(), labels
    )
    for _ in range(100):
        i, j = rng.integers(0, len(feats), size=2)
        d = wl_distance(feats[i], feats[j])
        assert 0.0 <= d <= 1.0
        assert d == wl_distance(feats[j], feats[i])


def test_feature_vector_validation():
    with pytest.raises(ValidationError):
        WLFeatureVector(counts={0: 0}, self_kernel=0)
    with pytest.raises(ValidationError):
        WLFeatureVector(counts={0: 2}, self_kernel=3)


def test_label_dictionary_interning():
    d = LabelDictionary()
    assert d.intern("NOUN") == 0
    assert d.intern((0, (1,))) == 1
    assert d.intern("NOUN") == 0
    assert len(d) == 2


def test_normalized_feature_matrix_unit_rows():
    rng = np.random.default_rng(11)
    labels = LabelDictionary()
    feats = features_for_trees(
        [random_tree(rng, f"s{i}") for i in range(25)], SyntacticConfig(), labels
    )
    mat = normalized_feature_matrix(feats, len(labels))
    assert mat.shape == (25, len(labels))
    assert mat.dtype == np.float64
    norms = np.sqrt(np.asarray(mat.multiply(mat).sum(axis=1)).ravel())
    assert np.all(np.abs(norms - 1.0) < 1e-12)


# --- corpus score ----------------------------------------------------------


def test_two_tree_score_anchor():
    report = syntactic_diversity([DET_NOUN, LONE_NOUN], SyntacticConfig(wl_iterations=1))
    assert abs(report.score - 100.0 * (1.0 - 1.0 / math.sqrt(8.0))) < 1e-10
    assert report.counts["pairs"] == 1


def test_copies_score_exactly_zero():
    trees = [
        make_tree(("DET", "NOUN", "VERB"), (1, 2, ROOT), sentence_id=f"s{i}")
        for i in range(10)
    ]
    report = syntactic_diversity(trees)
    assert report.score == 0.0


def test_score_needs_two_trees():
    with pytest.raises(ValidationError):
        syntactic_diversity([DET_NOUN])


def test_matrix_matches_scalar_distances():
    rng = np.random.default_rng(19)
    trees = [random_tree(rng, f"s{i}") for i in range(30)]
    config = SyntacticConfig()
    dm = distance_matrix(trees, config)
    labels = LabelDictionary()
    feats = features_for_trees(trees, config, labels)
    for i in range(30):
        for j in range(30):
            assert abs(dm.values[i, j] - wl_distance(feats[i], feats[j])) < 1e-9


def test_blocked_sum_matches_scalar_sum():
    # 600 rows spans multiple 512-row blocks
    rng = np.random.default_rng(23)
    trees = [random_tree(rng, f"s{i}") for i in range(600)]
    config = SyntacticConfig(wl_iterations=1)
    report = syntactic_diversity(trees, config)
    labels = LabelDictionary()
    feats = features_for_trees(trees, config, labels)
    total = 0.0
    for i in range(len(feats)):
        for j in range(i + 1, len(feats)):
            total += wl_distance(feats[i], feats[j])
    want = 100.0 * total / (600 * 599 // 2)
    assert abs(report.score - want) < 1e-8
    assert report.score == syntactic_diversity(trees, config, workers=8).score


def test_permutation_invariance():
    rng = np.random.default_rng(29)
    trees = [random_tree(rng, f"s{i}") for i in range(40)]
    base = syntactic_diversity(trees).score
    shuffled = [trees[i] for i in rng.permutation(40)]
    assert abs(syntactic_diversity(shuffled).score - base) < 1e-9


def test_subsample_deterministic():
    rng = np.random.default_rng(31)
    trees = [random_tree(rng, f"s{i}") for i in range(50)]
    a = syntactic_diversity(trees, SyntacticConfig(max_sentences=20, seed=4))
    b = syntactic_diversity(trees, SyntacticConfig(max_sentences=20, seed=4))
    assert a.score == b.score
    assert a.counts["sentences"] == 20
    assert a.counts["sentences_available"] == 50


def test_report_shape():
    report = syntactic_diversity([DET_NOUN, LONE_NOUN])
    assert report.metric == "syntactic"
    assert report.config["wl_iterations"] == 2
    assert set(report.counts) == {"sentences", "sentences_available", "pairs", "wl_labels"}


def test_include_deprel_separates_relations():
    t = make_tree(("PRON", "VERB"), (1, ROOT), deprels=("nsubj", "root"))
    u = make_tree(("PRON", "VERB"), (1, ROOT), deprels=("obj", "root"), sentence_id="s1")
    plain = features_for_trees([t, u], SyntacticConfig())
    assert wl_distance(plain[0], plain[1]) == 0.0
    rel = features_for_trees([t, u], SyntacticConfig(include_deprel=True))
    assert wl_distance(rel[0], rel[1]) > 0.0


def test_kernel_matrix_is_psd():
    rng = np.random.default_rng(37)
    trees = [random_tree(rng, f"s{i}") for i in range(20)]
    dm = distance_matrix(trees)
    gram = 1.0 - dm.values
    assert np.linalg.eigvalsh(gram).min() >= -1e-8


# --- distance matrix i/o ---------------------------------------------------


def test_distance_matrix_validation():
    ids = ("a", "b")
    with pytest.raises(ValidationError):
        DistanceMatrix(ids=ids, values=np.zeros((2, 3)))
    with pytest.raises(ValidationError):
        DistanceMatrix(ids=ids, values=np.array([[0.0, 2.0], [2.0, 0.0]]))
    with pytest.raises(ValidationError):
        DistanceMatrix(ids=ids, values=np.array([[0.5, 0.1], [0.1, 0.0]]))
    with pytest.raises(ValidationError):
        DistanceMatrix(ids=ids, values=np.array([[0.0, 0.3], [0.4, 0.0]]))


def test_distance_matrix_roundtrip(tmp_path):
    rng = np.random.default_rng(41)
    trees = [random_tree(rng, f"s{i}") for i in range(12)]
    dm = distance_matrix(trees)
    p = tmp_path / "d.bin"
    write_distance_matrix(dm, p)
    back = load_distance_matrix(p)
    assert back.ids == dm.ids
    assert np.allclose(back.values, dm.values, atol=1e-6)
    # canonical writer: a second write of the loaded matrix is byte-identical
    q = tmp_path / "d2.bin"
    write_distance_matrix(back, q)
    assert q.read_bytes() == p.read_bytes()


def test_load_distance_matrix_rejects_non_square(tmp_path):
    from divscope.corpus_io import EmbeddingMatrix, write_embeddings

    p = tmp_path / "d.bin"
    write_embeddings(
        EmbeddingMatrix(ids=("a", "b"), data=np.ones((2, 3), dtype=np.float32)), p
    )
    with pytest.raises(ValidationError, match="square"):
        load_distance_matrix(p)
