"""Record parsing, ego-network assembly, and dataset (de)serialization.

File schemas (UTF-8, LF):

* transactions CSV: header ``tx_hash,src,dst,amount_eth,timestamp``
* transactions JSONL: one object per line, same field names
* labels CSV: header ``address,label``
* dataset directory: one ``graph_NNNNN.json`` per graph with keys
  {nodes, edges, directed, center, label} (+ origin, kind for transformed
  graphs), plus a small ``meta.json``
"""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .graph import TransactionRecord, TxGraph, aggregate_transactions

log = logging.getLogger(__name__)

CSV_HEADER = ["tx_hash", "src", "dst", "amount_eth", "timestamp"]
MAX_DIAGNOSTICS = 20

DEFAULT_MIN_NODES = 3
DEFAULT_MAX_EDGES = 5000


class ParseError(ValueError):
    """Malformed input file; carries per-line diagnostics."""

    def __init__(self, path, diagnostics: list[str]):
        self.diagnostics = diagnostics
        preview = "; ".join(diagnostics)
        super().__init__(f"{path}: {len(diagnostics)} malformed row(s): {preview}")


def _record_from_fields(tx_hash, src, dst, amount, timestamp) -> TransactionRecord:
    return TransactionRecord(
        src=str(src),
        dst=str(dst),
        amount=float(amount),
        timestamp=int(timestamp),
        tx_hash=str(tx_hash),
    )


def parse_transaction_file(path, fmt: str) -> list[TransactionRecord]:
    """Read transfer records; aborts with line-numbered diagnostics on bad rows."""
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown format {fmt!r}")
    records: list[TransactionRecord] = []
    diagnostics: list[str] = []
    with open(path, newline="", encoding="utf-8") as fh:
        if fmt == "csv":
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != CSV_HEADER:
                raise ParseError(path, [f"line 1: expected header {','.join(CSV_HEADER)}"])
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    if len(row) != 5:
                        raise ValueError(f"expected 5 columns, got {len(row)}")
                    records.append(_record_from_fields(*row))
                except (ValueError, TypeError) as exc:
                    diagnostics.append(f"line {lineno}: {exc}")
                    if len(diagnostics) >= MAX_DIAGNOSTICS:
                        break
        else:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    records.append(
                        _record_from_fields(
                            obj.get("tx_hash", ""),
                            obj["src"],
                            obj["dst"],
                            obj["amount_eth"],
                            obj["timestamp"],
                        )
                    )
                except (ValueError, TypeError, KeyError) as exc:
                    diagnostics.append(f"line {lineno}: {exc}")
                    if len(diagnostics) >= MAX_DIAGNOSTICS:
                        break
    if diagnostics:
        raise ParseError(path, diagnostics)
    return records


def write_transaction_file(records: list[TransactionRecord], path, fmt: str) -> None:
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if fmt == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in records:
                writer.writerow([r.tx_hash, r.src, r.dst, repr(r.amount), r.timestamp])
        else:
            for r in records:
                fh.write(
                    json.dumps(
                        {
                            "tx_hash": r.tx_hash,
                            "src": r.src,
                            "dst": r.dst,
                            "amount_eth": r.amount,
                            "timestamp": r.timestamp,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )


def read_labels(path) -> dict[str, str]:
    """address -> label map from a two-column CSV with header."""
    labels: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["address", "label"]:
            raise ParseError(path, ["line 1: expected header address,label"])
        for row in reader:
            if row:
                labels[row[0]] = row[1]
    return labels


def filter_center_records(
    center: str, records: list[TransactionRecord]
) -> tuple[list[TransactionRecord], int]:
    """Keep records touching the center; also return the discarded count."""
    kept = [r for r in records if center in (r.src, r.dst)]
    return kept, len(records) - len(kept)


def build_ego_network(
    center: str, records: list[TransactionRecord], label: str = "unlabeled"
) -> TxGraph:
    """First-order ego network over the center and its direct counterparties."""
    kept, discarded = filter_center_records(center, records)
    if discarded:
        log.warning("build_ego_network(%s): discarded %d records not touching center", center, discarded)
    if not kept:
        raise ValueError("empty ego network")
    g = aggregate_transactions(kept, center)
    g.label = label
    g.validate()
    return g


@dataclass
class Dataset:
    """Labeled graphs plus bookkeeping for balanced classification runs."""

    graphs: list[TxGraph]
    name: str
    class_counts: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_graphs(cls, graphs: list[TxGraph], name: str) -> "Dataset":
        counts: dict[str, int] = {}
        for g in graphs:
            counts[g.label] = counts.get(g.label, 0) + 1
        return cls(graphs=graphs, name=name, class_counts=counts)

    @property
    def labels(self) -> list[str]:
        return [g.label for g in self.graphs]


def assemble_datasets(
    graphs: list[TxGraph], n_datasets: int, per_class_size: int, seed: int
) -> list[Dataset]:
    """Disjoint balanced datasets sampled without replacement, seed-stable."""
    by_class: dict[str, list[int]] = {}
    for i, g in enumerate(graphs):
        by_class.setdefault(g.label, []).append(i)
    need = n_datasets * per_class_size
    for label, idxs in sorted(by_class.items()):
        if len(idxs) < need:
            raise ValueError(
                f"insufficient graphs for class {label!r}: need {need}, have {len(idxs)}"
            )
    rng = np.random.default_rng(seed)
    shuffled = {
        label: [idxs[j] for j in rng.permutation(len(idxs))]
        for label, idxs in sorted(by_class.items())
    }
    datasets = []
    for d in range(n_datasets):
        chosen: list[int] = []
        for label in sorted(shuffled):
            chosen.extend(shuffled[label][d * per_class_size : (d + 1) * per_class_size])
        datasets.append(
            Dataset.from_graphs([graphs[i] for i in chosen], name=f"dataset{d + 1}")
        )
    return datasets


def filter_graphs(
    graphs: list[TxGraph],
    min_nodes: int = DEFAULT_MIN_NODES,
    max_edges: int = DEFAULT_MAX_EDGES,
) -> list[TxGraph]:
    """Drop degenerate ego networks (too small) and pathological ones (too big)."""
    return [g for g in graphs if g.n_nodes >= min_nodes and g.n_edges <= max_edges]


def build_labeled_ego_networks(
    records: list[TransactionRecord], labels: dict[str, str]
) -> list[TxGraph]:
    """One ego network per labeled address; addresses with no records are skipped."""
    graphs = []
    for address in sorted(labels):
        try:
            graphs.append(build_ego_network(address, records, label=labels[address]))
        except ValueError:
            log.warning("no records for labeled address %s; skipped", address)
    return graphs


# --- per-graph JSON serialization -----------------------------------------


def graph_to_dict(g: TxGraph, origin=None, kind: str | None = None) -> dict:
    d = {
        "nodes": list(g.nodes),
        "edges": [[u, v, w] for u, v, w in g.edge_list()],
        "directed": g.directed,
        "center": g.center,
        "label": g.label,
    }
    if origin is not None:
        d["origin"] = [[u, v, w] for u, v, w in origin]
    if kind is not None:
        d["kind"] = kind
    return d


def graph_from_dict(d: dict) -> TxGraph:
    g = TxGraph.from_edge_list(
        edges=[(u, v, float(w)) for u, v, w in d["edges"]],
        directed=bool(d["directed"]),
        center=d["center"],
        label=d.get("label", "unlabeled"),
        nodes=list(d["nodes"]),
        allow_negative_weights=d.get("kind") == "directed-tsgn",
    )
    if "origin" in d:  # line-graph node attribute = source edge weight
        g.node_attrs = np.array([[float(w)] for _, _, w in d["origin"]], dtype=np.float64)
    return g


def save_graph(g: TxGraph, path, origin=None, kind: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_dict(g, origin=origin, kind=kind), fh, sort_keys=True)
        fh.write("\n")


def load_graph(path) -> TxGraph:
    with open(path, encoding="utf-8") as fh:
        return graph_from_dict(json.load(fh))


def save_dataset(ds: Dataset, directory, origins=None, kind: str | None = None) -> None:
    """Write one JSON per graph plus meta.json into ``directory``."""
    os.makedirs(directory, exist_ok=True)
    for i, g in enumerate(ds.graphs):
        origin = origins[i] if origins is not None else None
        save_graph(g, os.path.join(directory, f"graph_{i:05d}.json"), origin=origin, kind=kind)
    meta = {"name": ds.name, "class_counts": ds.class_counts, "n_graphs": len(ds.graphs)}
    with open(os.path.join(directory, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True)
        fh.write("\n")


def load_dataset(directory) -> Dataset:
    files = sorted(
        f for f in os.listdir(directory) if f.startswith("graph_") and f.endswith(".json")
    )
    if not files:
        raise ValueError(f"no graph files in {directory}")
    graphs = [load_graph(os.path.join(directory, f)) for f in files]
    name = os.path.basename(os.path.normpath(directory))
    meta_path = os.path.join(directory, "meta.json")
    if os.path.exists(meta_path):
        with open(meta_path, encoding="utf-8") as fh:
            name = json.load(fh).get("name", name)
    return Dataset.from_graphs(graphs, name=name)
