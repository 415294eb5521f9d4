from collections import Counter

import numpy as np
import pytest

from tsgn.embed import (
    EmbedParams,
    build_corpus,
    train_embeddings,
    wl_relabel,
)
from tsgn.graph import TxGraph
from tsgn.transform import build_directed_tsgn

from oracles import random_digraph


def permuted_copy(g, rng):
    perm = rng.permutation(g.n_nodes)
    renamed = {g.nodes[i]: f"q{perm[i]:03d}" for i in range(g.n_nodes)}
    return TxGraph.from_edge_list(
        [(renamed[u], renamed[v], w) for u, v, w in g.edge_list()],
        directed=g.directed,
        center=renamed[g.center],
        label=g.label,
        nodes=sorted(renamed.values()),
    )


class TestWlRelabel:
    def test_token_count_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            g = random_digraph(rng, int(rng.integers(2, 12)), 0.3)
            h = int(rng.integers(0, 5))
            doc = wl_relabel(g, h)
            assert len(doc.tokens) == (h + 1) * g.n_nodes

    def test_isomorphic_graphs_same_token_multiset(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            g = random_digraph(rng, 9, 0.35)
            h = permuted_copy(g, rng)
            assert Counter(wl_relabel(g, 3).tokens) == Counter(wl_relabel(h, 3).tokens)

    def test_single_node_stable_after_iteration_zero(self):
        g = TxGraph.from_edge_list([], True, "a", nodes=["a"])
        doc = wl_relabel(g, 3)
        assert len(doc.tokens) == 4
        assert len(set(doc.tokens)) == 1

    def test_p3_and_k3_differ_at_h1_with_constant_init(self):
        p3 = TxGraph.from_edge_list([("a", "b", 1.0), ("b", "c", 1.0)], False, "b")
        k3 = TxGraph.from_edge_list(
            [("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0)], False, "a"
        )
        p3.node_attrs = np.ones((3, 1))
        k3.node_attrs = np.ones((3, 1))
        d1 = wl_relabel(p3, 1, use_weight=False)
        d2 = wl_relabel(k3, 1, use_weight=False)
        assert Counter(d1.tokens[:3]) == Counter(d2.tokens[:3])  # constant init
        assert Counter(d1.tokens) != Counter(d2.tokens)

    def test_direction_tags_distinguish_orientation(self):
        a = TxGraph.from_edge_list([("x", "c", 1.0), ("y", "c", 1.0)], True, "c")
        b = TxGraph.from_edge_list([("c", "x", 1.0), ("c", "y", 1.0)], True, "c")
        with_dir = lambda g: Counter(wl_relabel(g, 1, use_direction=True).tokens)
        without = lambda g: Counter(wl_relabel(g, 1, use_direction=False, use_weight=False).tokens)
        assert with_dir(a) != with_dir(b)
        b_const = TxGraph.from_edge_list([("c", "x", 1.0), ("c", "y", 1.0)], True, "c")
        a.node_attrs = np.ones((3, 1))
        b_const.node_attrs = np.ones((3, 1))
        assert without(a) == without(b_const)

    def test_line_graph_weight_buckets(self):
        g = TxGraph.from_edge_list([("a", "b", 150.0), ("b", "c", 0.002)], True, "b")
        out = build_directed_tsgn(g)
        doc = wl_relabel(out.graph, 0, use_weight=True)
        assert doc.tokens == ["w2", "w-3"]

    def test_negative_height(self):
        g = TxGraph.from_edge_list([("a", "b", 1.0)], True, "a")
        with pytest.raises(ValueError):
            wl_relabel(g, -1)


class TestCorpus:
    def test_identical_graphs_share_vocabulary(self):
        g = random_digraph(np.random.default_rng(3), 8, 0.4)
        docs, vocab = build_corpus([g, g], h=2)
        assert Counter(docs[0].tokens) == Counter(docs[1].tokens)
        assert sum(vocab.values()) == 2 * 3 * g.n_nodes

    def test_single_node_graphs_have_tiny_vocabulary(self):
        g = TxGraph.from_edge_list([], True, "a", nodes=["a"])
        docs, vocab = build_corpus([g] * 5, h=3)
        assert len(vocab) <= 4

    def test_every_token_resolvable(self):
        rng = np.random.default_rng(4)
        graphs = [random_digraph(rng, int(rng.integers(2, 10)), 0.3) for _ in range(100)]
        docs, vocab = build_corpus(graphs, h=3)
        for doc in docs:
            assert all(tok in vocab for tok in doc.tokens)

    def test_empty_corpus(self):
        with pytest.raises(ValueError, match="empty corpus"):
            build_corpus([], h=3)


def small_corpus(n_graphs=12, seed=5):
    rng = np.random.default_rng(seed)
    graphs = [random_digraph(rng, int(rng.integers(3, 9)), 0.4) for _ in range(n_graphs)]
    return build_corpus(graphs, h=2)


class TestTraining:
    def test_loss_decreases(self):
        docs, vocab = small_corpus()
        model = train_embeddings(docs, vocab, EmbedParams(dim=32, epochs=30, seed=1))
        assert model.losses[-1] <= model.losses[0]

    def test_identical_documents_embed_close(self):
        rng = np.random.default_rng(6)
        twin = random_digraph(rng, 8, 0.4)
        others = [random_digraph(rng, int(rng.integers(3, 10)), 0.4) for _ in range(8)]
        docs, vocab = build_corpus([twin, twin, *others], h=2)
        model = train_embeddings(docs, vocab, EmbedParams(dim=32, epochs=60, seed=2))
        v = model.vectors / np.linalg.norm(model.vectors, axis=1, keepdims=True)
        cos_twin = float(v[0] @ v[1])
        cos_rest = float(np.mean([v[0] @ v[i] for i in range(2, len(docs))]))
        assert cos_twin > cos_rest

    def test_fixed_seed_bitwise_identical(self):
        docs, vocab = small_corpus()
        params = EmbedParams(dim=16, epochs=10, seed=9)
        a = train_embeddings(docs, vocab, params)
        b = train_embeddings(docs, vocab, params)
        assert np.array_equal(a.vectors, b.vectors)
        assert a.losses == b.losses

    def test_vectors_finite(self):
        docs, vocab = small_corpus()
        model = train_embeddings(docs, vocab, EmbedParams(dim=8, epochs=5, seed=0))
        assert np.all(np.isfinite(model.vectors))

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            train_embeddings([], {}, EmbedParams())

    def test_param_validation(self):
        docs, vocab = small_corpus(3)
        with pytest.raises(ValueError):
            train_embeddings(docs, vocab, EmbedParams(dim=0))
        with pytest.raises(ValueError):
            train_embeddings(docs, vocab, EmbedParams(epochs=0))


class TestSerialization:
    def test_csv_and_sidecar(self, tmp_path):
        docs, vocab = small_corpus(4)
        model = train_embeddings(docs, vocab, EmbedParams(dim=4, epochs=3, seed=0))
        from tsgn.embed import write_embeddings_csv, write_model_sidecar

        write_embeddings_csv(tmp_path / "emb.csv", model, ["phishing"] * 4)
        write_model_sidecar(tmp_path / "model.json", model)
        lines = (tmp_path / "emb.csv").read_text().splitlines()
        assert lines[0] == "graph_id,label,v0,v1,v2,v3"
        assert len(lines) == 5
        import json

        meta = json.loads((tmp_path / "model.json").read_text())
        assert meta["dim"] == 4
        assert meta["epochs"] == 3
