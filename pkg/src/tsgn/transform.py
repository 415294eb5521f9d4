"""Line-graph transforms of transaction graphs.

Two mappings over a directed weighted transaction graph:

* TSGN: the weighted line graph of the undirected-processed graph. Each
  undirected edge becomes a node; two nodes are adjacent when their source
  edges share an address. New edge weight = mean of the two source weights.
* Directed-TSGN: the directed line graph. Each directed edge becomes a node;
  node(a->b) points at node(b->c) exactly when the first edge's head is the
  second edge's tail (a continued transaction path). New edge weight =
  log(sum of the two source weights), floored at EPS against log(0).

Construction groups edges by endpoint and emits pairs within groups, so the
work is proportional to the output size: sum-of-C(deg, 2) for the TSGN and
sum-of(in*out) for the Directed-TSGN. The Directed-TSGN is never larger.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import TxGraph, to_undirected

EPS = 1e-18  # one wei, in ETH

KIND_TSGN = "tsgn"
KIND_DIRECTED = "directed-tsgn"


@dataclass
class LineGraphOutput:
    """A transformed graph plus the edge-origin bookkeeping.

    ``origin[i]`` is the (src_id, dst_id, weight) source edge that node ``i``
    of ``graph`` represents; the mapping is a bijection.
    """

    graph: TxGraph
    origin: list[tuple[str, str, float]]
    kind: str


def weight_map(w1: float, w2: float, kind: str) -> float:
    """Combine two source-edge weights into a line-graph edge weight."""
    if kind == "mean":
        return (w1 + w2) / 2.0
    if kind == "logsum":
        return float(np.log(max(w1 + w2, EPS)))
    raise ValueError(f"unknown weight mapping {kind!r}")


def _line_center(g: TxGraph, src: np.ndarray, dst: np.ndarray) -> str:
    """First new node whose source edge touches the input center."""
    c = g.nodes.index(g.center)
    touching = np.flatnonzero((src == c) | (dst == c))
    return f"e{int(touching[0])}" if touching.size else "e0"


def build_tsgn(g: TxGraph) -> LineGraphOutput:
    """Undirected weighted line graph with mean weight mapping.

    Directed input is undirected-processed first (reciprocal edges merged by
    weight summation). Each new node carries its source edge's weight as a
    one-dimensional attribute.
    """
    u = to_undirected(g) if g.directed else g
    m = u.n_edges
    if m == 0:
        raise ValueError("empty line graph")
    n = u.n_nodes
    eids = np.arange(m, dtype=np.int64)
    endpoints = np.concatenate((u.src, u.dst))
    by_node = np.concatenate((eids, eids))[np.argsort(endpoints, kind="stable")]
    counts = np.bincount(endpoints, minlength=n)
    offsets = np.concatenate((np.zeros(1, np.int64), np.cumsum(counts))).astype(np.int64)
    left, right = _kernels.pairs_within_groups(by_node, offsets)
    new_w = 0.5 * (u.weights[left] + u.weights[right])
    lo = np.minimum(left, right)
    hi = np.maximum(left, right)
    nodes = [f"e{i}" for i in range(m)]
    graph = TxGraph(
        nodes=nodes,
        src=lo,
        dst=hi,
        weights=new_w,
        directed=False,
        center=_line_center(u, u.src, u.dst),
        label=u.label,
        node_attrs=u.weights.reshape(-1, 1).copy(),
    )
    origin = u.edge_list()
    return LineGraphOutput(graph=graph, origin=origin, kind=KIND_TSGN)


def build_directed_tsgn(g: TxGraph) -> LineGraphOutput:
    """Directed line graph: edges chain head-to-tail, log-sum weights."""
    if not g.directed:
        raise ValueError("directed graph required")
    m = g.n_edges
    if m == 0:
        raise ValueError("empty line graph")
    n = g.n_nodes
    eids = np.arange(m, dtype=np.int64)
    in_by = eids[np.argsort(g.dst, kind="stable")]
    in_off = np.concatenate(
        (np.zeros(1, np.int64), np.cumsum(np.bincount(g.dst, minlength=n)))
    ).astype(np.int64)
    out_by = eids[np.argsort(g.src, kind="stable")]
    out_off = np.concatenate(
        (np.zeros(1, np.int64), np.cumsum(np.bincount(g.src, minlength=n)))
    ).astype(np.int64)
    left, right = _kernels.cross_pairs(in_by, in_off, out_by, out_off)
    new_w = np.log(np.maximum(g.weights[left] + g.weights[right], EPS))
    nodes = [f"e{i}" for i in range(m)]
    graph = TxGraph(
        nodes=nodes,
        src=left,
        dst=right,
        weights=new_w,
        directed=True,
        center=_line_center(g, g.src, g.dst),
        label=g.label,
        node_attrs=g.weights.reshape(-1, 1).copy(),
    )
    return LineGraphOutput(graph=graph, origin=g.edge_list(), kind=KIND_DIRECTED)


def initial_node_attributes(obj: TxGraph | LineGraphOutput, kind: str) -> np.ndarray:
    """Per-node attribute matrix used to seed embeddings and classifiers.

    ``tn``: [in-degree, out-degree] per node of a transaction graph.
    ``line-graph``: [source-edge weight] per node, which requires the origin
    mapping of a ``LineGraphOutput``.
    """
    if kind == "tn":
        g = obj.graph if isinstance(obj, LineGraphOutput) else obj
        n = g.n_nodes
        out_deg = np.bincount(g.src, minlength=n)
        in_deg = np.bincount(g.dst, minlength=n)
        if not g.directed:
            deg = (in_deg + out_deg).astype(np.float64)
            return np.column_stack((deg, deg))
        return np.column_stack((in_deg, out_deg)).astype(np.float64)
    if kind == "line-graph":
        if not isinstance(obj, LineGraphOutput):
            raise ValueError("line-graph attributes need an origin mapping")
        return np.array([[w] for _, _, w in obj.origin], dtype=np.float64)
    raise ValueError(f"unknown attribute kind {kind!r}")
