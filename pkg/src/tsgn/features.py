"""Ten handcrafted topological descriptors of a transaction graph.

All ten are computed on the undirected, unweighted simple projection of the
input, whatever its kind (transaction graph or either line graph):

    n_nodes, n_links, avg_degree, leaf_fraction, avg_clustering,
    largest_eigenvalue, density, avg_betweenness, avg_closeness,
    avg_neighbor_degree

Conventions for degenerate inputs: a single-node or edgeless graph scores 0
for everything past n_nodes/n_links; nodes of degree < 2 contribute 0 to the
clustering average; closeness is restricted to each node's connected
component and isolated nodes score 0; betweenness uses unordered pairs and
is not normalized beyond the average over nodes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import TxGraph

FEATURE_NAMES = (
    "n_nodes",
    "n_links",
    "avg_degree",
    "leaf_fraction",
    "avg_clustering",
    "largest_eigenvalue",
    "density",
    "avg_betweenness",
    "avg_closeness",
    "avg_neighbor_degree",
)

EIG_TOL = 1e-9
EIG_MAX_ITER = 10000


class PowerIterationError(RuntimeError):
    """Raised when the eigenvalue iteration hits its iteration cap."""

    def __init__(self, estimate: float, iterations: int):
        super().__init__(
            f"power iteration did not converge in {iterations} iterations "
            f"(last estimate {estimate:.6g})"
        )
        self.estimate = estimate
        self.iterations = iterations


@dataclass
class FeatureVector:
    values: np.ndarray  # (10,) float64, FEATURE_NAMES order
    names: tuple[str, ...] = FEATURE_NAMES


def undirected_csr(g: TxGraph) -> tuple[np.ndarray, np.ndarray, int]:
    """Undirected unweighted simple projection as sorted CSR adjacency."""
    n = g.n_nodes
    if g.n_edges == 0:
        return np.zeros(n + 1, np.int64), np.empty(0, np.int64), n
    lo = np.minimum(g.src, g.dst)
    hi = np.maximum(g.src, g.dst)
    keys = np.unique(lo * n + hi)  # reciprocal directed pairs collapse here
    u = keys // n
    v = keys % n
    rows = np.concatenate((u, v))
    cols = np.concatenate((v, u))
    order = np.lexsort((cols, rows))
    indices = cols[order].astype(np.int64)
    indptr = np.concatenate(
        (np.zeros(1, np.int64), np.cumsum(np.bincount(rows, minlength=n)))
    ).astype(np.int64)
    return indptr, indices, n


def largest_eigenvalue(
    g: TxGraph, tol: float = EIG_TOL, max_iter: int = EIG_MAX_ITER, seed: int = 0
) -> float:
    """Spectral radius of the undirected adjacency via power iteration.

    Random positive start vector; convergence is a Rayleigh-quotient change
    below ``tol``. Edgeless graphs return 0. Raises PowerIterationError
    (carrying the last estimate) past ``max_iter``.
    """
    indptr, indices, n = undirected_csr(g)
    if indices.size == 0:
        return 0.0
    x0 = np.random.default_rng(seed).uniform(0.5, 1.5, n)
    est, iters, ok = _kernels.power_iteration(indptr, indices, x0, tol, max_iter)
    if not ok:
        raise PowerIterationError(est, iters)
    return float(est)


def average_betweenness(g: TxGraph) -> float:
    """Mean over nodes of the unnormalized shortest-path dependency sum.

    Pairs (s, t) are unordered with s != i != t; pairs in different
    components contribute nothing.
    """
    indptr, indices, n = undirected_csr(g)
    if n == 0 or indices.size == 0:
        return 0.0
    sums = _kernels.betweenness_sums(indptr, indices, n)
    return float(sums.sum() / (2.0 * n))


def average_closeness(g: TxGraph) -> float:
    """Mean over nodes of (component size - 1) / (distance sum in component)."""
    indptr, indices, n = undirected_csr(g)
    if n == 0:
        return 0.0
    comp, dsum = _kernels.bfs_counts(indptr, indices, n)
    close = np.where(comp > 1, (comp - 1) / np.maximum(dsum, 1), 0.0)
    return float(close.mean())


def average_neighbor_degree(g: TxGraph) -> float:
    """Mean over nodes of the average degree among each node's neighbors."""
    indptr, indices, n = undirected_csr(g)
    if n == 0:
        return 0.0
    deg = np.diff(indptr)
    if indices.size == 0:
        return 0.0
    rows = np.repeat(np.arange(n), deg)
    nbr_sum = np.bincount(rows, weights=deg[indices].astype(np.float64), minlength=n)
    per_node = np.where(deg > 0, nbr_sum / np.maximum(deg, 1), 0.0)
    return float(per_node.mean())


def handcrafted_vector(g: TxGraph) -> FeatureVector:
    """All ten descriptors of the undirected unweighted projection."""
    indptr, indices, n = undirected_csr(g)
    links = indices.size // 2
    deg = np.diff(indptr)
    values = np.zeros(10, dtype=np.float64)
    values[0] = n
    values[1] = links
    if links == 0:
        return FeatureVector(values)
    values[2] = 2.0 * links / n
    values[3] = float((deg == 1).sum()) / n
    pairs = _kernels.adjacent_neighbor_pairs(indptr, indices, n)
    denom = deg * (deg - 1)
    clust = np.where(denom > 0, pairs / np.maximum(denom, 1), 0.0)
    values[4] = float(clust.mean())
    values[5] = largest_eigenvalue(g)
    values[6] = 2.0 * links / (n * (n - 1)) if n > 1 else 0.0
    values[7] = average_betweenness(g)
    values[8] = average_closeness(g)
    values[9] = average_neighbor_degree(g)
    return FeatureVector(values)


def feature_matrix(graphs: list[TxGraph]) -> np.ndarray:
    """Stack handcrafted vectors for a dataset: (n_graphs, 10)."""
    return np.array([handcrafted_vector(g).values for g in graphs], dtype=np.float64)


def write_features_csv(
    path,
    graph_ids: list[str],
    labels: list[str],
    matrix: np.ndarray,
    names: tuple[str, ...] = FEATURE_NAMES,
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["graph_id", "label", *names])
        for gid, label, row in zip(graph_ids, labels, matrix):
            writer.writerow([gid, label, *(repr(float(x)) for x in row)])


def read_features_csv(path) -> tuple[list[str], list[str], np.ndarray, list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        names = header[2:]
        ids, labels, rows = [], [], []
        for row in reader:
            ids.append(row[0])
            labels.append(row[1])
            rows.append([float(x) for x in row[2:]])
    return ids, labels, np.array(rows, dtype=np.float64), names
