"""End-to-end runs: dataset -> transform -> features -> evaluation.

Every run writes a manifest (config snapshot, derived stage seeds, library
versions, per-stage wall times) plus per-stage artifacts, so a run can be
reproduced exactly from its output directory. All randomness flows from one
master seed; stage seeds are stable hashes of (master seed, stage name).
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import accel, embed, features, forest, ingest, synth
from .graph import TxGraph, degrees, to_undirected
from .transform import build_directed_tsgn, build_tsgn

TRANSFORMS = ("tn", "tsgn", "dtsgn")
FEATURE_METHODS = ("hand", "embed")
SOURCES = ("files", "synth", "fetch")


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def stage_seed(master_seed: int, stage: str) -> int:
    digest = hashlib.blake2b(f"{master_seed}:{stage}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") % (2**63)


@dataclass
class FilesConfig:
    dataset_dir: str = ""
    records: str = ""
    format: str = "csv"
    labels: str = ""
    min_nodes: int = ingest.DEFAULT_MIN_NODES
    max_edges: int = ingest.DEFAULT_MAX_EDGES


@dataclass
class FetchConfig:
    base_url: str = ""
    labels: str = ""  # address,label CSV; addresses to fetch
    api_key: str = ""
    rate_limit: float = 5.0
    page_size: int = 100
    max_pages: int = 100
    min_nodes: int = ingest.DEFAULT_MIN_NODES
    max_edges: int = ingest.DEFAULT_MAX_EDGES


@dataclass
class EvalConfig:
    n_runs: int = 500
    split_fraction: float = 0.1
    positive: str = "phishing"


@dataclass
class RunConfig:
    source: str = "synth"
    transform: str = "dtsgn"
    features: str = "hand"
    seed: int = 0
    out: str = "runs/out"
    synth: synth.SynthConfig = field(default_factory=synth.SynthConfig)
    files: FilesConfig = field(default_factory=FilesConfig)
    fetch: FetchConfig = field(default_factory=FetchConfig)
    forest: forest.ForestParams = field(default_factory=forest.ForestParams)
    eval: EvalConfig = field(default_factory=EvalConfig)
    embed: embed.EmbedParams = field(default_factory=embed.EmbedParams)

    def validate(self) -> None:
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}")
        if self.transform not in TRANSFORMS:
            raise ValueError(f"transform must be one of {TRANSFORMS}")
        if self.features not in FEATURE_METHODS:
            raise ValueError(f"features must be one of {FEATURE_METHODS}")


def _profile_from_dict(d: dict, label: str) -> synth.GenProfile:
    base = synth.PHISHING_DEFAULT if label == "phishing" else synth.NORMAL_DEFAULT
    prof = replace(base)
    for key, value in d.items():
        if key == "n_neighbors":
            value = (int(value[0]), int(value[1]))
        if not hasattr(prof, key):
            raise ValueError(f"unknown profile key {key!r}")
        setattr(prof, key, value)
    return prof


def config_from_dict(data: dict) -> RunConfig:
    cfg = RunConfig()
    run = data.get("run", {})
    for key in ("source", "transform", "features", "seed", "out"):
        if key in run:
            setattr(cfg, key, run[key])
    sy = dict(data.get("synth", {}))
    if "phishing" in sy:
        cfg.synth.phishing = _profile_from_dict(sy.pop("phishing"), "phishing")
    if "normal" in sy:
        cfg.synth.normal = _profile_from_dict(sy.pop("normal"), "normal")
    for key, value in sy.items():
        if not hasattr(cfg.synth, key):
            raise ValueError(f"unknown synth key {key!r}")
        setattr(cfg.synth, key, value)
    for section, target in (
        ("files", cfg.files),
        ("fetch", cfg.fetch),
        ("classifier", cfg.forest),
        ("eval", cfg.eval),
        ("embed", cfg.embed),
    ):
        for key, value in data.get(section, {}).items():
            if not hasattr(target, key):
                raise ValueError(f"unknown {section} key {key!r}")
            setattr(target, key, value)
    cfg.validate()
    return cfg


def load_config(path: str) -> RunConfig:
    with open(path, "rb") as fh:
        if path.endswith(".json"):
            data = json.load(fh)
        else:
            if sys.version_info >= (3, 11):
                import tomllib
            else:
                import tomli as tomllib
            data = tomllib.load(fh)
    return config_from_dict(data)


def _load_stage(cfg: RunConfig) -> ingest.Dataset:
    if cfg.source == "synth":
        return synth.generate_dataset(cfg.synth, stage_seed(cfg.seed, "synth"))
    if cfg.source == "files":
        fc = cfg.files
        if fc.dataset_dir:
            return ingest.load_dataset(fc.dataset_dir)
        records = ingest.parse_transaction_file(fc.records, fc.format)
        labels = ingest.read_labels(fc.labels)
        graphs = ingest.build_labeled_ego_networks(records, labels)
        graphs = ingest.filter_graphs(graphs, fc.min_nodes, fc.max_edges)
        if not graphs:
            raise ValueError("no graphs left after filtering")
        return ingest.Dataset.from_graphs(graphs, name="files")
    from . import fetch as fetch_mod

    fc = cfg.fetch
    labels = ingest.read_labels(fc.labels)
    client = fetch_mod.ClientConfig(
        base_url=fc.base_url,
        api_key=fc.api_key,
        rate_limit=fc.rate_limit,
        page_size=fc.page_size,
        max_pages=fc.max_pages,
    )
    graphs = []
    for address in sorted(labels):
        records = fetch_mod.fetch_address_history(address, client)
        if records:
            graphs.append(ingest.build_ego_network(address, records, label=labels[address]))
    graphs = ingest.filter_graphs(graphs, fc.min_nodes, fc.max_edges)
    if not graphs:
        raise ValueError("no graphs fetched")
    return ingest.Dataset.from_graphs(graphs, name="fetched")


def _transform_stage(cfg: RunConfig, ds: ingest.Dataset):
    """Returns (graphs ready for features, origins or None, kind or None)."""
    if cfg.transform == "tn":
        return ds.graphs, None, None
    builder = build_tsgn if cfg.transform == "tsgn" else build_directed_tsgn
    graphs = []
    origins = []
    for g in ds.graphs:
        out = builder(g)
        graphs.append(out.graph)
        origins.append(out.origin)
    kind = "tsgn" if cfg.transform == "tsgn" else "directed-tsgn"
    return graphs, origins, kind


def _features_stage(cfg: RunConfig, graphs: list[TxGraph], out_dir: str):
    ids = [f"g{i:05d}" for i in range(len(graphs))]
    labels = [g.label for g in graphs]
    if cfg.features == "hand":
        X = features.feature_matrix(graphs)
        features.write_features_csv(os.path.join(out_dir, "features.csv"), ids, labels, X)
        return X, labels
    use_direction = cfg.transform != "tsgn"
    docs, vocab = embed.build_corpus(
        graphs, cfg.embed.height, use_direction=use_direction, use_weight=True, graph_ids=ids
    )
    params = replace(cfg.embed, seed=stage_seed(cfg.seed, "embed"))
    model = embed.train_embeddings(docs, vocab, params)
    embed.write_embeddings_csv(os.path.join(out_dir, "features.csv"), model, labels)
    embed.write_model_sidecar(os.path.join(out_dir, "model.json"), model)
    return model.vectors, labels


def run_pipeline(cfg: RunConfig) -> tuple[forest.EvalReport, dict]:
    """Execute all configured stages; artifacts land in ``cfg.out``."""
    cfg.validate()
    os.makedirs(cfg.out, exist_ok=True)
    timings: dict[str, float] = {}

    def timed(stage, fn, *args):
        t0 = time.perf_counter()
        try:
            result = fn(*args)
        except Exception as exc:
            raise PipelineError(stage, exc) from exc
        timings[stage] = time.perf_counter() - t0
        return result

    ds = timed("load", _load_stage, cfg)
    graphs, origins, kind = timed("transform", _transform_stage, cfg, ds)
    graphs_dir = os.path.join(cfg.out, "graphs")
    os.makedirs(graphs_dir, exist_ok=True)
    for i, g in enumerate(graphs):
        ingest.save_graph(
            g,
            os.path.join(graphs_dir, f"graph_{i:05d}.json"),
            origin=origins[i] if origins else None,
            kind=kind,
        )
    X, labels = timed("features", _features_stage, cfg, graphs, cfg.out)
    report = timed(
        "evaluate",
        lambda: forest.evaluate(
            X,
            labels,
            n_runs=cfg.eval.n_runs,
            params=cfg.forest,
            seed=stage_seed(cfg.seed, "evaluate"),
            split_fraction=cfg.eval.split_fraction,
            positive=cfg.eval.positive,
        ),
    )

    config_snapshot = asdict(cfg)
    report_doc = {
        "config": config_snapshot,
        "dataset": {"name": ds.name, "class_counts": ds.class_counts, "n_graphs": len(ds.graphs)},
        "report": report.to_dict(),
        "timings": {**timings, "eval_phases": report.wall_times},
    }
    with open(os.path.join(cfg.out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report_doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(os.path.join(cfg.out, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(
            f"dataset: {ds.name} ({len(ds.graphs)} graphs, {ds.class_counts})\n"
            f"transform: {cfg.transform}  features: {cfg.features}\n"
            f"F1 ({report.positive}-positive): {report.summary_cell()} over {report.n_runs} runs\n"
            f"macro-F1 mean: {100.0 * report.macro_mean:.2f}\n"
        )
    manifest = {
        "config": config_snapshot,
        "stage_seeds": {s: stage_seed(cfg.seed, s) for s in ("synth", "embed", "evaluate")},
        "backend": accel.backend(),
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "numba": accel.NUMBA_VERSION,
            "tsgn": "0.1.0",
        },
        "timings": timings,
    }
    with open(os.path.join(cfg.out, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return report, manifest


# --- construction benchmark -------------------------------------------------


def expected_line_graph_sizes(g: TxGraph) -> tuple[int, int]:
    """Closed-form output edge counts: sum C(deg,2) and sum in*out."""
    und = degrees(to_undirected(g)) if g.directed else degrees(g)
    tsgn_edges = int((und.total * (und.total - 1) // 2).sum())
    if g.directed:
        d = degrees(g)
        dtsgn_edges = int((d.in_degree * d.out_degree).sum())
    else:
        dtsgn_edges = 0
    return tsgn_edges, dtsgn_edges


def bench_construction(
    graphs: list[TxGraph], repetitions: int = 3, backends: list[str] | None = None
) -> dict:
    """Time TSGN vs Directed-TSGN construction, best-of-repetitions.

    Runs single-threaded on each requested kernel backend. Also reports the
    closed-form output sizes, which the timings track.
    """
    if backends is None:
        backends = ["numba", "numpy"] if accel.HAS_NUMBA else ["numpy"]
    if not graphs:
        return {"rows": [], "tsgn_over_dtsgn_time_ratio": {}}
    rows = []
    expected = [expected_line_graph_sizes(g) for g in graphs]
    sum_tsgn = sum(e[0] for e in expected)
    sum_dtsgn = sum(e[1] for e in expected)
    previous = accel.backend()
    ratios = {}
    try:
        for backend_name in backends:
            accel.set_backend(backend_name)
            if graphs:  # warm up JIT compilation outside the timed region
                build_tsgn(graphs[0])
                build_directed_tsgn(graphs[0])
            times = {}
            for kind, builder in (("tsgn", build_tsgn), ("dtsgn", build_directed_tsgn)):
                best = float("inf")
                for _ in range(max(1, repetitions)):
                    t0 = time.perf_counter()
                    total_edges = 0
                    for g in graphs:
                        total_edges += builder(g).graph.n_edges
                    best = min(best, time.perf_counter() - t0)
                times[kind] = best
                rows.append(
                    {
                        "kind": kind,
                        "backend": backend_name,
                        "best_seconds": best,
                        "total_edges": total_edges,
                        "expected_edges": sum_tsgn if kind == "tsgn" else sum_dtsgn,
                        "n_graphs": len(graphs),
                        "repetitions": repetitions,
                    }
                )
            if graphs and times["dtsgn"] > 0:
                ratios[backend_name] = times["tsgn"] / times["dtsgn"]
    finally:
        accel.set_backend(previous)
    return {"rows": rows, "tsgn_over_dtsgn_time_ratio": ratios}


def write_bench_csv(path, bench: dict) -> None:
    rows = bench["rows"]
    fields = ["kind", "backend", "best_seconds", "total_edges", "expected_edges", "n_graphs", "repetitions"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
