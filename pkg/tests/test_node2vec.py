from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from src.features.graph import build_mention_graph
from src.features.node2vec import node2vec_walk, simulate_walks, train_node_embeddings
from src.features.sgns import init_input_matrix
from src.models import SkipGramConfig, WalkConfig
from src.validators import ValidationError

from tests.conftest import make_doc


def path_graph():
    docs = [
        make_doc("a", raw_texts=["@b"]),
        make_doc("b", raw_texts=["@c"]),
        make_doc("c", raw_texts=["@d"]),
        make_doc("d", raw_texts=[]),
    ]
    return build_mention_graph(docs, celebrity_threshold=5)


def two_cliques(size=5):
    docs = []
    for prefix in ("x", "y"):
        members = [f"{prefix}{i}" for i in range(size)]
        for u in members:
            others = " ".join(f"@{v}" for v in members if v != u)
            docs.append(make_doc(u, raw_texts=[others]))
    return docs


def walk_pairs(g, p, q, n=100_000, seed=0):
    cfg = WalkConfig(p=p, q=q, walk_length=3, walks_per_node=1)
    rng = np.random.default_rng(seed)
    return Counter(tuple(node2vec_walk(g, "b", cfg, rng)[1:]) for _ in range(n))


def test_second_step_distribution_on_path():
    counts = walk_pairs(path_graph(), p=1.0, q=1.0)
    assert set(counts) == {("a", "b"), ("c", "b"), ("c", "d")}
    observed = [counts[("a", "b")], counts[("c", "b")], counts[("c", "d")]]
    _, pvalue = chisquare(observed, [50_000, 25_000, 25_000])
    assert pvalue > 0.001


def test_large_q_keeps_walks_local():
    g = path_graph()
    outward = walk_pairs(g, p=1.0, q=1.0)[("c", "d")]
    local = walk_pairs(g, p=1.0, q=100.0)[("c", "d")]
    # c -> d has weight 1/q against 1/p for returning to b
    assert local < outward / 10


def test_walks_follow_edges():
    docs = [make_doc("a", raw_texts=["@b @c"]), make_doc("b", raw_texts=["@c"]), make_doc("c", raw_texts=[])]
    g = build_mention_graph(docs, celebrity_threshold=5)
    walks = simulate_walks(g, WalkConfig(walk_length=10, walks_per_node=3, seed=4))
    assert len(walks) == 9
    for walk in walks:
        assert len(walk) == 10
        for u, v in zip(walk, walk[1:]):
            assert g.weight(u, v) > 0


def test_walks_identical_across_worker_counts():
    g = build_mention_graph(two_cliques(), celebrity_threshold=5)
    cfg = WalkConfig(p=0.5, q=2.0, walk_length=12, walks_per_node=4, seed=9)
    assert simulate_walks(g, cfg, workers=1) == simulate_walks(g, cfg, workers=2)


def test_isolated_nodes_get_zero_vectors():
    docs = two_cliques(3) + [make_doc("loner", raw_texts=["nobody here"])]
    g = build_mention_graph(docs, celebrity_threshold=5)
    walks = simulate_walks(g, WalkConfig(walk_length=5, walks_per_node=2))
    assert all(walk[0] != "loner" for walk in walks)

    emb = train_node_embeddings(walks, SkipGramConfig(dim=4, window=2, epochs=1))
    matrix = emb.matrix(["x0", "loner"])
    assert matrix[0].any()
    assert not matrix[1].any()
    assert not emb.vector("loner").any()


def test_no_walks_is_an_error():
    with pytest.raises(ValidationError):
        train_node_embeddings([], SkipGramConfig(dim=4))


def test_embedding_is_deterministic_with_one_worker():
    g = build_mention_graph(two_cliques(), celebrity_threshold=5)
    walks = simulate_walks(g, WalkConfig(walk_length=8, walks_per_node=2, seed=1))
    cfg = SkipGramConfig(dim=6, window=3, epochs=2, seed=5)
    np.testing.assert_array_equal(
        train_node_embeddings(walks, cfg).vectors,
        train_node_embeddings(walks, cfg).vectors,
    )


def test_cliques_embed_apart():
    docs = two_cliques()
    g = build_mention_graph(docs, celebrity_threshold=5)
    walks = simulate_walks(g, WalkConfig(walk_length=20, walks_per_node=10, seed=2))
    emb = train_node_embeddings(walks, SkipGramConfig(dim=8, window=3, epochs=5, seed=2))

    nodes = [d.user_id for d in docs]
    v = emb.matrix(nodes)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    sims = v @ v.T
    same = np.array([[a[0] == b[0] for b in nodes] for a in nodes])
    off_diagonal = ~np.eye(len(nodes), dtype=bool)
    assert sims[same & off_diagonal].mean() > sims[~same].mean()


def test_triangle_step_frequencies():
    # a cycle of single mentions, so every edge weighs 1
    docs = [make_doc("a", raw_texts=["@b"]), make_doc("b", raw_texts=["@c"]), make_doc("c", raw_texts=["@a"])]
    g = build_mention_graph(docs, celebrity_threshold=5)
    cfg = WalkConfig(walk_length=3, walks_per_node=1)
    rng = np.random.default_rng(11)
    counts = Counter(tuple(node2vec_walk(g, "a", cfg, rng)[1:]) for _ in range(100_000))
    # from b (came from a): a returns at 1/p, c neighbors a so weighs 1
    pairs = [("b", "a"), ("b", "c"), ("c", "a"), ("c", "b")]
    assert set(counts) == set(pairs)
    _, pvalue = chisquare([counts[p] for p in pairs], [25_000] * 4)
    assert pvalue > 0.001


def test_zero_epochs_keeps_random_initialization():
    g = build_mention_graph(two_cliques(3), celebrity_threshold=5)
    walks = simulate_walks(g, WalkConfig(walk_length=5, walks_per_node=2, seed=3))
    cfg = SkipGramConfig(dim=4, window=2, epochs=0, seed=8)
    emb = train_node_embeddings(walks, cfg)
    expected = init_input_matrix(np.random.default_rng(cfg.seed), len(emb.nodes), cfg.dim)
    np.testing.assert_array_equal(emb.vectors, expected)
