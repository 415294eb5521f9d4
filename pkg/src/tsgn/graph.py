"""Directed weighted simple graphs for per-address transaction ego networks.

Edges are stored as parallel numpy arrays of node indices and weights so the
transform and feature kernels can run directly on them. Node identity stays
string-based (addresses); ``nodes[i]`` is the id of index ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LABELS = ("phishing", "normal", "unlabeled")


@dataclass
class TxGraph:
    """One transaction graph: address nodes, weighted value-transfer edges.

    Simple graph: no self-loops, at most one edge per ordered pair when
    directed (unordered pair when undirected). Undirected edges are stored
    with ``src index < dst index``.
    """

    nodes: list[str]
    src: np.ndarray  # int64 node indices
    dst: np.ndarray  # int64 node indices
    weights: np.ndarray  # float64, ETH amounts
    directed: bool
    center: str
    label: str = "unlabeled"
    node_attrs: np.ndarray | None = None  # (n_nodes, k) float64

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return int(self.src.shape[0])

    def node_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.nodes)}

    def edge_list(self) -> list[tuple[str, str, float]]:
        return [
            (self.nodes[int(u)], self.nodes[int(v)], float(w))
            for u, v, w in zip(self.src, self.dst, self.weights)
        ]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TxGraph):
            return NotImplemented
        if (
            self.nodes != other.nodes
            or self.directed != other.directed
            or self.center != other.center
            or self.label != other.label
        ):
            return False
        if not (
            np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.weights, other.weights)
        ):
            return False
        if (self.node_attrs is None) != (other.node_attrs is None):
            return False
        if self.node_attrs is not None:
            return np.array_equal(self.node_attrs, other.node_attrs)
        return True

    @classmethod
    def from_edge_list(
        cls,
        edges: list[tuple[str, str, float]],
        directed: bool,
        center: str,
        label: str = "unlabeled",
        nodes: list[str] | None = None,
        allow_negative_weights: bool = False,
    ) -> "TxGraph":
        """Build from (src_id, dst_id, weight) triples.

        When ``nodes`` is omitted the node set is the sorted union of edge
        endpoints and the center. Undirected edges are canonicalized to
        ``index(src) < index(dst)``. Negative weights only occur in
        log-weighted line graphs; transaction amounts must be non-negative.
        """
        if nodes is None:
            names = {center}
            for u, v, _ in edges:
                names.add(u)
                names.add(v)
            nodes = sorted(names)
        index = {name: i for i, name in enumerate(nodes)}
        m = len(edges)
        src = np.empty(m, dtype=np.int64)
        dst = np.empty(m, dtype=np.int64)
        weights = np.empty(m, dtype=np.float64)
        for k, (u, v, w) in enumerate(edges):
            a, b = index[u], index[v]
            if not directed and a > b:
                a, b = b, a
            src[k], dst[k], weights[k] = a, b, w
        g = cls(nodes, src, dst, weights, directed, center, label)
        g.validate(weights_nonneg=not allow_negative_weights)
        return g

    def validate(self, weights_nonneg: bool = True) -> None:
        """Raise ValueError on any simple-graph invariant violation."""
        n = self.n_nodes
        if self.center not in self.nodes:
            raise ValueError(f"center {self.center!r} not in node set")
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        if self.n_edges:
            if self.src.min() < 0 or self.src.max() >= n:
                raise ValueError("edge source index out of range")
            if self.dst.min() < 0 or self.dst.max() >= n:
                raise ValueError("edge destination index out of range")
            if np.any(self.src == self.dst):
                raise ValueError("self-loop edge")
            if not np.all(np.isfinite(self.weights)):
                raise ValueError("edge weights must be finite")
            if weights_nonneg and np.any(self.weights < 0):
                raise ValueError("edge weights must be finite and non-negative")
            if self.directed:
                keys = self.src * n + self.dst
            else:
                if np.any(self.src > self.dst):
                    raise ValueError("undirected edges must satisfy src < dst")
                keys = self.src * n + self.dst
            if np.unique(keys).shape[0] != self.n_edges:
                raise ValueError("duplicate edge for a node pair")
        if self.node_attrs is not None and self.node_attrs.shape[0] != n:
            raise ValueError("node_attrs row count must match node count")


@dataclass
class DegreeProfile:
    """Unweighted per-node degree counts, aligned with ``TxGraph.nodes``."""

    in_degree: np.ndarray
    out_degree: np.ndarray
    total: np.ndarray

    def as_dict(self, g: TxGraph) -> dict[str, tuple[int, int, int]]:
        return {
            name: (int(self.in_degree[i]), int(self.out_degree[i]), int(self.total[i]))
            for i, name in enumerate(g.nodes)
        }


@dataclass
class TransactionRecord:
    """One value transfer between two addresses."""

    src: str
    dst: str
    amount: float  # ETH
    timestamp: int  # seconds since epoch; parsed but unused downstream
    tx_hash: str = ""

    def __post_init__(self) -> None:
        if not self.src or not self.dst:
            raise ValueError("src and dst must be non-empty")
        if self.amount < 0:
            raise ValueError("invalid amount")


def aggregate_transactions(records: list[TransactionRecord], center: str) -> TxGraph:
    """Collapse raw transfers into one directed weighted simple graph.

    Repeated transfers over the same ordered pair sum into a single edge;
    self-transfers are dropped. Nodes are sorted and edges lexsorted by
    (src, dst), so the result is invariant to record order.
    """
    if not records:
        raise ValueError("empty ego network")
    sums: dict[tuple[str, str], float] = {}
    names = {center}
    for r in records:
        if r.amount < 0:
            raise ValueError("invalid amount")
        if r.src == r.dst:
            continue
        sums[(r.src, r.dst)] = sums.get((r.src, r.dst), 0.0) + r.amount
        names.add(r.src)
        names.add(r.dst)
    nodes = sorted(names)
    index = {name: i for i, name in enumerate(nodes)}
    m = len(sums)
    src = np.empty(m, dtype=np.int64)
    dst = np.empty(m, dtype=np.int64)
    weights = np.empty(m, dtype=np.float64)
    for k, ((u, v), w) in enumerate(sorted(sums.items())):
        src[k], dst[k], weights[k] = index[u], index[v], w
    g = TxGraph(nodes, src, dst, weights, directed=True, center=center)
    g.validate()
    return g


def to_undirected(g: TxGraph) -> TxGraph:
    """Merge reciprocal directed edges by weight summation.

    Single-direction edges keep their weight; a pair (a->b, b->a) becomes one
    undirected edge of summed weight. Output edges are canonical (src < dst)
    and lexsorted.
    """
    if not g.directed:
        raise ValueError("already undirected")
    lo = np.minimum(g.src, g.dst)
    hi = np.maximum(g.src, g.dst)
    keys = lo * g.n_nodes + hi
    order = np.argsort(keys, kind="stable")
    keys_sorted = keys[order]
    uniq, start = np.unique(keys_sorted, return_index=True)
    weights = np.add.reduceat(g.weights[order], start) if len(uniq) else np.empty(0)
    src = (uniq // g.n_nodes).astype(np.int64)
    dst = (uniq % g.n_nodes).astype(np.int64)
    return TxGraph(
        list(g.nodes),
        src,
        dst,
        np.asarray(weights, dtype=np.float64),
        directed=False,
        center=g.center,
        label=g.label,
    )


def degrees(g: TxGraph) -> DegreeProfile:
    """Unweighted degree counts from the edge arrays."""
    n = g.n_nodes
    if g.directed:
        out_deg = np.bincount(g.src, minlength=n).astype(np.int64)
        in_deg = np.bincount(g.dst, minlength=n).astype(np.int64)
        return DegreeProfile(in_deg, out_deg, in_deg + out_deg)
    deg = (
        np.bincount(g.src, minlength=n) + np.bincount(g.dst, minlength=n)
    ).astype(np.int64)
    return DegreeProfile(deg.copy(), deg.copy(), deg)
