"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
complete. Every tolerance is pinned here; nothing is calibrated at runtime.
"""

import json
import math
import time
from collections import Counter

import numpy as np
import pytest

from tsgn import accel
from tsgn.embed import EmbedParams, build_corpus, train_embeddings, wl_relabel
from tsgn.features import handcrafted_vector
from tsgn.forest import ForestParams, evaluate, f1_score
from tsgn.graph import TxGraph, degrees, to_undirected
from tsgn.pipeline import RunConfig, bench_construction, run_pipeline
from tsgn.synth import GenProfile, SynthConfig, generate_account_graph
from tsgn.transform import build_directed_tsgn, build_tsgn, weight_map

from oracles import (
    dtsgn_pairs_bruteforce,
    f1_from_confusion,
    oracle_feature_vector,
    random_digraph,
    tsgn_pairs_bruteforce,
    undirected_simple_edges,
)

PASS = "[PASS]"


def announce(n, text):
    print(f"\n{PASS} criterion {n}: {text}", flush=True)


def test_criterion_1_line_graph_oracle_agreement():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    for i in range(200):
        n = int(rng.integers(2, 16))
        p = 0.2 if i % 2 == 0 else 0.5
        g = random_digraph(rng, n, p)

        und = to_undirected(g)
        tsgn = build_tsgn(g)
        got = {
            (min(int(a), int(b)), max(int(a), int(b)))
            for a, b in zip(tsgn.graph.src, tsgn.graph.dst)
        }
        assert got == tsgn_pairs_bruteforce(und.edge_list())
        deg = degrees(und).total
        assert tsgn.graph.n_edges == int((deg * (deg - 1) // 2).sum())

        dtsgn = build_directed_tsgn(g)
        got_d = {(int(a), int(b)) for a, b in zip(dtsgn.graph.src, dtsgn.graph.dst)}
        assert got_d == dtsgn_pairs_bruteforce(g.edge_list())
        d = degrees(g)
        assert dtsgn.graph.n_edges == int((d.in_degree * d.out_degree).sum())
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    announce(1, f"200 random graphs match the O(E^2) oracle exactly ({elapsed:.1f}s)")


def test_criterion_2_toy_constructions():
    star = TxGraph.from_edge_list(
        [("p1", "c", 1.0), ("p2", "c", 2.0), ("c", "p3", 3.0), ("p4", "c", 4.0), ("c", "p5", 5.0)],
        directed=True,
        center="c",
    )
    out = build_tsgn(star)
    assert out.graph.n_nodes == 5
    assert out.graph.n_edges == 10  # K5

    toy = TxGraph.from_edge_list(
        [
            ("n1", "c", 1.0),  # W1
            ("c", "n2", 2.0),  # W2
            ("n3", "n4", 3.0),  # W3
            ("n4", "n2", 4.0),  # W4
            ("n3", "n2", 5.0),  # W5
        ],
        directed=True,
        center="c",
    )
    out_d = build_directed_tsgn(toy)
    assert out_d.graph.n_nodes == 5
    assert out_d.graph.n_edges == 2
    chains = {
        (out_d.origin[int(u[1:])][2], out_d.origin[int(v[1:])][2])
        for u, v, _ in out_d.graph.edge_list()
    }
    assert chains == {(1.0, 2.0), (3.0, 4.0)}  # W1->W2 and W3->W4 only
    announce(2, "5-edge star -> K5 TSGN; two-continuation toy -> exactly 2 directed edges")


def test_criterion_3_weight_mappings():
    assert weight_map(2.0, 4.0, "mean") == pytest.approx(3.0, abs=1e-12)
    assert weight_map(2.0, 4.0, "logsum") == pytest.approx(math.log(6.0), abs=1e-12)
    announce(3, "mean(2,4)=3 and logsum(2,4)=ln 6 to 1e-12")


def _assert_features(got, expected):
    got = np.asarray(got)
    expected = np.asarray(expected)
    np.testing.assert_allclose(got[:5], expected[:5], atol=1e-9)
    assert abs(got[5] - expected[5]) < 1e-6
    np.testing.assert_allclose(got[6:], expected[6:], atol=1e-9)


def test_criterion_4_handcrafted_oracle_agreement():
    rng = np.random.default_rng(4040)
    for _ in range(100):
        n = int(rng.integers(2, 13))
        g = random_digraph(rng, n, float(rng.uniform(0.15, 0.6)))
        expected = oracle_feature_vector(n, undirected_simple_edges(g))
        _assert_features(handcrafted_vector(g).values, expected)

    p3 = TxGraph.from_edge_list([("a", "b", 1.0), ("b", "c", 1.0)], False, "b")
    _assert_features(
        handcrafted_vector(p3).values,
        [3, 2, 4 / 3, 2 / 3, 0, math.sqrt(2), 2 / 3, 1 / 3, 7 / 9, 5 / 3],
    )
    k3 = TxGraph.from_edge_list(
        [("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0)], False, "a"
    )
    _assert_features(handcrafted_vector(k3).values, [3, 3, 2, 0, 1, 2, 1, 0, 1, 2])
    star4 = TxGraph.from_edge_list([("c", f"p{i}", 1.0) for i in range(4)], False, "c")
    _assert_features(
        handcrafted_vector(star4).values,
        [5, 4, 8 / 5, 4 / 5, 0, 2.0, 2 / 5, 6 / 5, 23 / 35, 17 / 5],
    )
    announce(4, "10 features match brute force on 100 graphs (1e-9; eigenvalue 1e-6)")


def test_criterion_5_f1_equivalence():
    rng = np.random.default_rng(55)
    for _ in range(1000):
        size = int(rng.integers(1, 120))
        y_true = rng.choice(["phishing", "normal"], size=size)
        y_pred = rng.choice(["phishing", "normal"], size=size)
        assert f1_score(y_true, y_pred) == pytest.approx(
            f1_from_confusion(y_true, y_pred, "phishing"), abs=1e-12
        )
    assert f1_score(["normal"], ["normal"]) == 0.0  # no true or predicted positives
    assert f1_score(["phishing"], ["normal"]) == 0.0  # recall denominator only
    assert f1_score(["normal"], ["phishing"]) == 0.0  # precision denominator only
    announce(5, "f1 equals confusion-matrix computation on 1000 random pairs (1e-12)")


def test_criterion_6_sparsity_and_benchmark_direction():
    t0 = time.perf_counter()
    profile = GenProfile(
        label="phishing",
        n_neighbors=(200, 1000),
        in_fraction=0.9,
        reciprocal_prob=0.0,
        noise=0.0,
    )
    graphs = [generate_account_graph(profile, 9000 + i) for i in range(100)]
    for g in graphs:
        assert build_directed_tsgn(g).graph.n_edges <= build_tsgn(g).graph.n_edges
    # gate the speed ratio on the package's default construction path
    default_backend = "numba" if accel.HAS_NUMBA else "numpy"
    bench = bench_construction(graphs, repetitions=3, backends=[default_backend])
    by_kind = {row["kind"]: row for row in bench["rows"]}
    for row in bench["rows"]:
        assert row["total_edges"] == row["expected_edges"]
    t_tsgn = by_kind["tsgn"]["best_seconds"]
    t_dtsgn = by_kind["dtsgn"]["best_seconds"]
    assert t_dtsgn <= t_tsgn / 5.0, f"ratio {t_tsgn / t_dtsgn:.2f}x below 5x"
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    announce(
        6,
        f"dtsgn never denser and {t_tsgn / t_dtsgn:.1f}x faster to build "
        f"({by_kind['tsgn']['total_edges']} vs {by_kind['dtsgn']['total_edges']} edges, "
        f"{elapsed:.1f}s, backend {default_backend})",
    )


def test_criterion_7_end_to_end_classification(tmp_path):
    t0 = time.perf_counter()
    cfg = RunConfig()
    cfg.source = "synth"
    cfg.transform = "dtsgn"
    cfg.features = "hand"
    cfg.seed = 77
    cfg.out = str(tmp_path / "run")
    cfg.synth = SynthConfig(
        n_per_class=500,
        phishing=GenProfile(label="phishing", in_fraction=0.9, noise=0.05, reciprocal_prob=0.05),
        normal=GenProfile(label="normal", in_fraction=0.5, noise=0.05, reciprocal_prob=0.05),
    )
    cfg.eval.n_runs = 100
    report, _ = run_pipeline(cfg)
    assert report.mean >= 0.90, f"mean F1 {report.mean:.3f} below 0.90"

    # label-independent features: chance-level F1 on balanced data
    rng = np.random.default_rng(7)
    X_null = rng.normal(size=(200, 10))
    y_null = np.array(["phishing"] * 100 + ["normal"] * 100)
    null_report = evaluate(X_null, y_null, n_runs=100, params=ForestParams(), seed=3)
    assert 0.4 <= null_report.mean <= 0.6, f"null mean F1 {null_report.mean:.3f}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 180.0
    announce(
        7,
        f"dtsgn+handcrafted F1 {report.summary_cell()} >= 0.90; "
        f"null data {null_report.mean:.3f} in [0.4, 0.6] ({elapsed:.0f}s)",
    )


def test_criterion_8_wl_and_embedding_properties():
    rng = np.random.default_rng(88)
    graphs = [random_digraph(rng, int(rng.integers(2, 12)), 0.35) for _ in range(50)]
    h = 3
    for g in graphs:
        assert len(wl_relabel(g, h).tokens) == (h + 1) * g.n_nodes

    for g in graphs[:10]:
        perm = rng.permutation(g.n_nodes)
        renamed = {g.nodes[i]: f"q{perm[i]:03d}" for i in range(g.n_nodes)}
        twin = TxGraph.from_edge_list(
            [(renamed[u], renamed[v], w) for u, v, w in g.edge_list()],
            directed=True,
            center=renamed[g.center],
            nodes=sorted(renamed.values()),
        )
        assert Counter(wl_relabel(g, h).tokens) == Counter(wl_relabel(twin, h).tokens)

    corpus_graphs = [random_digraph(rng, int(rng.integers(4, 12)), 0.4) for _ in range(60)]
    docs, vocab = build_corpus(corpus_graphs, h=3)
    params = EmbedParams(dim=64, epochs=50, seed=5)
    t0 = time.perf_counter()
    model = train_embeddings(docs, vocab, params)
    train_time = time.perf_counter() - t0
    assert train_time < 30.0
    assert model.losses[-1] < model.losses[0]
    again = train_embeddings(docs, vocab, params)
    assert np.array_equal(model.vectors, again.vectors)
    announce(
        8,
        f"token identity, isomorphism invariance, 60-graph training in {train_time:.1f}s "
        f"(loss {model.losses[0]:.3f} -> {model.losses[-1]:.3f}), bitwise reproducible",
    )


def test_criterion_9_pipeline_determinism(tmp_path):
    cfg = RunConfig()
    cfg.source = "synth"
    cfg.transform = "tsgn"
    cfg.features = "hand"
    cfg.seed = 99
    cfg.out = str(tmp_path / "run")
    cfg.synth = SynthConfig(n_per_class=25)
    cfg.forest.n_trees = 25
    cfg.eval.n_runs = 10

    def run_and_strip():
        run_pipeline(cfg)
        with open(tmp_path / "run" / "report.json") as fh:
            doc = json.load(fh)
        doc.pop("timings", None)
        return json.dumps(doc, sort_keys=True).encode()

    assert run_and_strip() == run_and_strip()
    announce(9, "identical config+seed -> byte-identical report JSON (timings excluded)")
