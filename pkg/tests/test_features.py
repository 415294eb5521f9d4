import math

import numpy as np
import pytest

from tsgn.features import (
    FEATURE_NAMES,
    PowerIterationError,
    average_betweenness,
    average_closeness,
    average_neighbor_degree,
    handcrafted_vector,
    largest_eigenvalue,
)
from tsgn.graph import TxGraph

from oracles import (
    oracle_feature_vector,
    oracle_lambda,
    random_undirected,
    undirected_simple_edges,
)


def path3():
    return TxGraph.from_edge_list([("a", "b", 1.0), ("b", "c", 1.0)], False, "b")

def triangle():
    return TxGraph.from_edge_list(
        [("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0)], False, "a"
    )

def star(k):
    return TxGraph.from_edge_list(
        [("c", f"p{i}", 1.0) for i in range(k)], False, "c"
    )


def assert_vector(got, expected):
    got = np.asarray(got)
    expected = np.asarray(expected)
    np.testing.assert_allclose(got[:5], expected[:5], atol=1e-9)
    assert got[5] == pytest.approx(expected[5], abs=1e-6)  # eigenvalue
    np.testing.assert_allclose(got[6:], expected[6:], atol=1e-9)


class TestFixedCases:
    def test_path3(self):
        expected = [3, 2, 4 / 3, 2 / 3, 0, math.sqrt(2), 2 / 3, 1 / 3, 7 / 9, 5 / 3]
        assert_vector(handcrafted_vector(path3()).values, expected)

    def test_single_node(self):
        g = TxGraph.from_edge_list([], True, "a", nodes=["a"])
        assert handcrafted_vector(g).values.tolist() == [1.0] + [0.0] * 9

    def test_triangle(self):
        expected = [3, 3, 2, 0, 1, 2, 1, 0, 1, 2]
        assert_vector(handcrafted_vector(triangle()).values, expected)

    def test_star4(self):
        # center-on-all-pairs betweenness 6/5; closeness (1 + 4*(4/7))/5
        expected = [5, 4, 8 / 5, 4 / 5, 0, 2.0, 2 / 5, 6 / 5, 23 / 35, 17 / 5]
        assert_vector(handcrafted_vector(star(4)).values, expected)

    def test_names_order(self):
        assert FEATURE_NAMES[0] == "n_nodes"
        assert len(FEATURE_NAMES) == 10
        assert handcrafted_vector(path3()).names == FEATURE_NAMES


class TestEigenvalue:
    def test_single_edge(self):
        g = TxGraph.from_edge_list([("a", "b", 1.0)], False, "a")
        assert largest_eigenvalue(g) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
    def test_star_sqrt_k(self, k):
        assert largest_eigenvalue(star(k)) == pytest.approx(math.sqrt(k), abs=1e-6)

    def test_matches_dense_eigensolver(self):
        rng = np.random.default_rng(17)
        for _ in range(30):
            g = random_undirected(rng, int(rng.integers(2, 11)), 0.4, min_edges=1)
            edges = undirected_simple_edges(g)
            assert largest_eigenvalue(g) == pytest.approx(
                oracle_lambda(g.n_nodes, edges), abs=1e-6
            )

    def test_edgeless_is_zero(self):
        g = TxGraph.from_edge_list([], False, "a", nodes=["a", "b"])
        assert largest_eigenvalue(g) == 0.0

    def test_nonconvergence_carries_estimate(self):
        with pytest.raises(PowerIterationError) as exc:
            largest_eigenvalue(triangle(), tol=0.0, max_iter=5)
        assert exc.value.estimate == pytest.approx(2.0, abs=0.5)


class TestBetweenness:
    def test_triangle_zero(self):
        assert average_betweenness(triangle()) == 0.0

    def test_path3(self):
        assert average_betweenness(path3()) == pytest.approx(1 / 3, abs=1e-12)

    def test_star4_center_on_all_pairs(self):
        assert average_betweenness(star(4)) == pytest.approx(6 / 5, abs=1e-12)


class TestCloseness:
    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_complete_graph_is_one(self, n):
        names = [f"v{i}" for i in range(n)]
        g = TxGraph.from_edge_list(
            [(names[i], names[j], 1.0) for i in range(n) for j in range(i + 1, n)],
            False,
            names[0],
        )
        assert average_closeness(g) == pytest.approx(1.0, abs=1e-12)

    def test_path3(self):
        assert average_closeness(path3()) == pytest.approx(7 / 9, abs=1e-12)

    def test_isolated_nodes_score_zero(self):
        g = TxGraph.from_edge_list([], False, "a", nodes=["a", "b"])
        assert average_closeness(g) == 0.0


class TestNeighborDegree:
    def test_triangle(self):
        assert average_neighbor_degree(triangle()) == pytest.approx(2.0)

    def test_path3(self):
        assert average_neighbor_degree(path3()) == pytest.approx(5 / 3)

    def test_single_node(self):
        g = TxGraph.from_edge_list([], False, "a", nodes=["a"])
        assert average_neighbor_degree(g) == 0.0


class TestOracleAgreement:
    def test_random_graphs_match_bruteforce(self, backend):
        rng = np.random.default_rng(101)
        n_graphs = 40 if backend == "numba" else 15
        for _ in range(n_graphs):
            n = int(rng.integers(2, 13))
            g = random_undirected(rng, n, float(rng.uniform(0.15, 0.6)))
            expected = oracle_feature_vector(n, undirected_simple_edges(g))
            assert_vector(handcrafted_vector(g).values, expected)

    def test_directed_input_projects(self):
        rng = np.random.default_rng(5)
        from oracles import random_digraph

        g = random_digraph(rng, 9, 0.35)
        expected = oracle_feature_vector(g.n_nodes, undirected_simple_edges(g))
        assert_vector(handcrafted_vector(g).values, expected)

    def test_isomorphism_invariance(self):
        rng = np.random.default_rng(23)
        g = random_undirected(rng, 9, 0.4, min_edges=2)
        perm = rng.permutation(g.n_nodes)
        renamed = {g.nodes[i]: f"w{perm[i]:02d}" for i in range(g.n_nodes)}
        h = TxGraph.from_edge_list(
            [(renamed[u], renamed[v], w) for u, v, w in g.edge_list()],
            False,
            renamed[g.center],
        )
        a, b = handcrafted_vector(g).values, handcrafted_vector(h).values
        assert_vector(a, b)

    def test_adding_edge_monotone_in_l_k_d(self):
        rng = np.random.default_rng(31)
        g = random_undirected(rng, 8, 0.3, min_edges=1)
        existing = undirected_simple_edges(g)
        missing = [
            (i, j)
            for i in range(8)
            for j in range(i + 1, 8)
            if (i, j) not in existing
        ]
        if not missing:
            pytest.skip("dense draw")
        i, j = missing[0]
        h = TxGraph.from_edge_list(
            g.edge_list() + [(g.nodes[i], g.nodes[j], 1.0)], False, g.center
        )
        before = handcrafted_vector(g).values
        after = handcrafted_vector(h).values
        for pos in (1, 2, 6):  # links, avg degree, density
            assert after[pos] >= before[pos]
