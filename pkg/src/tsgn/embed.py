"""Whole-graph embeddings from WL subtree tokens and a skipgram objective.

Each graph becomes a document of rooted-subgraph tokens: iteration 0 is a
per-node signature (degree pair, or a bucketed source-edge weight for
line-graph nodes), and iteration i compresses the node's label together with
its sorted, direction-tagged neighbor labels through a stable 64-bit digest.
A document-predicts-token skipgram with negative sampling then trains one
vector per graph; token vectors are discarded.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graph import TxGraph

WEIGHT_BUCKET_EPS = 1e-18


@dataclass
class WlDocument:
    graph_id: str
    tokens: list[str]  # (h+1) * n_nodes entries, iteration-major


@dataclass
class EmbedParams:
    height: int = 3
    dim: int = 128
    lr: float = 0.025
    epochs: int = 200
    negatives: int = 5
    seed: int = 0


@dataclass
class EmbeddingModel:
    vocabulary: dict[str, int]  # token -> index
    vectors: np.ndarray  # (n_graphs, dim)
    graph_ids: list[str]
    params: EmbedParams
    losses: list[float] = field(default_factory=list)


def _digest(text: str) -> str:
    return hashlib.blake2b(text.encode("utf-8"), digest_size=8).hexdigest()


def _initial_labels(g: TxGraph, use_weight: bool) -> list[str]:
    attrs = g.node_attrs
    if attrs is not None and attrs.shape[1] == 1:
        if not use_weight:
            return ["x"] * g.n_nodes
        return [
            f"w{math.floor(math.log10(float(w) + WEIGHT_BUCKET_EPS))}"
            for w in attrs[:, 0]
        ]
    if attrs is not None and attrs.shape[1] == 2:
        return [f"d{int(a)}_{int(b)}" for a, b in attrs]
    n = g.n_nodes
    out_deg = np.bincount(g.src, minlength=n)
    in_deg = np.bincount(g.dst, minlength=n)
    if g.directed:
        return [f"d{int(i)}_{int(o)}" for i, o in zip(in_deg, out_deg)]
    return [f"d{int(d)}" for d in in_deg + out_deg]


def wl_relabel(
    g: TxGraph,
    h: int,
    use_direction: bool = True,
    use_weight: bool = True,
    graph_id: str = "g",
) -> WlDocument:
    """WL label sequence for one graph: (h+1) tokens per node.

    Direction tags split each node's neighbor multiset into in/out halves on
    directed graphs when enabled. Nodes with no neighbors keep their label
    across iterations.
    """
    if h < 0:
        raise ValueError("height must be >= 0")
    n = g.n_nodes
    adj: list[list[tuple[str, int]]] = [[] for _ in range(n)]
    tag_in, tag_out = ("i", "o") if (g.directed and use_direction) else ("n", "n")
    for u, v in zip(g.src, g.dst):
        adj[int(u)].append((tag_out, int(v)))
        adj[int(v)].append((tag_in, int(u)))
    labels = _initial_labels(g, use_weight)
    tokens = list(labels)
    for _ in range(h):
        new = []
        for v in range(n):
            if not adj[v]:
                new.append(labels[v])
                continue
            nbrs = sorted(f"{tag}{labels[w]}" for tag, w in adj[v])
            new.append(_digest(labels[v] + "|" + ",".join(nbrs)))
        labels = new
        tokens.extend(labels)
    return WlDocument(graph_id=graph_id, tokens=tokens)


def build_corpus(
    graphs: list[TxGraph],
    h: int,
    use_direction: bool = True,
    use_weight: bool = True,
    graph_ids: list[str] | None = None,
) -> tuple[list[WlDocument], dict[str, int]]:
    """Documents for a dataset plus token frequency counts (insertion order)."""
    if not graphs:
        raise ValueError("empty corpus")
    if graph_ids is None:
        graph_ids = [f"g{i:05d}" for i in range(len(graphs))]
    docs = [
        wl_relabel(g, h, use_direction, use_weight, graph_id=gid)
        for g, gid in zip(graphs, graph_ids)
    ]
    counts: dict[str, int] = {}
    for doc in docs:
        for tok in doc.tokens:
            counts[tok] = counts.get(tok, 0) + 1
    return docs, counts


def train_embeddings(
    documents: list[WlDocument],
    vocabulary: dict[str, int],
    params: EmbedParams,
) -> EmbeddingModel:
    """Skipgram with negative sampling over (graph, token) pairs.

    Negatives follow the unigram^0.75 distribution; the learning rate decays
    linearly from lr to lr/100 across epochs. Single-threaded and bitwise
    deterministic for a fixed seed and backend.
    """
    if not documents:
        raise ValueError("empty corpus")
    if params.dim < 1 or params.epochs < 1:
        raise ValueError("dim and epochs must be >= 1")
    tokens = list(vocabulary)
    index = {t: i for i, t in enumerate(tokens)}
    counts = np.array([vocabulary[t] for t in tokens], dtype=np.float64)
    pair_doc = []
    pair_tok = []
    for d, doc in enumerate(documents):
        for tok in doc.tokens:
            pair_doc.append(d)
            pair_tok.append(index[tok])
    pair_doc = np.array(pair_doc, dtype=np.int64)
    pair_tok = np.array(pair_tok, dtype=np.int64)
    noise = counts**0.75
    cum = np.cumsum(noise / noise.sum())
    rng = np.random.default_rng(params.seed)
    n_graphs, dim = len(documents), params.dim
    gvecs = (rng.random((n_graphs, dim)) - 0.5) / dim
    tvecs = np.zeros((len(tokens), dim), dtype=np.float64)
    lr_start, lr_end = params.lr, params.lr / 100.0
    losses = []
    for epoch in range(params.epochs):
        frac = epoch / (params.epochs - 1) if params.epochs > 1 else 0.0
        lr = lr_start + (lr_end - lr_start) * frac
        negs = np.searchsorted(
            cum, rng.random((pair_doc.shape[0], params.negatives))
        ).astype(np.int64)
        np.clip(negs, 0, len(tokens) - 1, out=negs)
        losses.append(
            float(_kernels.skipgram_epoch(pair_doc, pair_tok, negs, gvecs, tvecs, lr))
        )
    if not np.all(np.isfinite(gvecs)):
        raise RuntimeError("non-finite embedding values after training")
    return EmbeddingModel(
        vocabulary=index,
        vectors=gvecs,
        graph_ids=[doc.graph_id for doc in documents],
        params=params,
        losses=losses,
    )


def write_embeddings_csv(path, model: EmbeddingModel, labels: list[str]) -> None:
    dim = model.vectors.shape[1]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("graph_id,label," + ",".join(f"v{i}" for i in range(dim)) + "\n")
        for gid, label, row in zip(model.graph_ids, labels, model.vectors):
            fh.write(f"{gid},{label}," + ",".join(repr(float(x)) for x in row) + "\n")


def write_model_sidecar(path, model: EmbeddingModel) -> None:
    meta = {
        "height": model.params.height,
        "dim": model.params.dim,
        "lr": model.params.lr,
        "epochs": model.params.epochs,
        "negatives": model.params.negatives,
        "seed": model.params.seed,
        "vocabulary_size": len(model.vocabulary),
        "n_graphs": len(model.graph_ids),
        "final_loss": model.losses[-1] if model.losses else None,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")
