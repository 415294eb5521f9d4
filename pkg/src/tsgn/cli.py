"""Command-line interface: batch subcommands over config files.

Flags override config-file values. All outputs are report/artifact files in
the --out directory; there is no interactive mode.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from . import features as features_mod
from . import forest as forest_mod
from . import ingest, pipeline, synth


def _base_config(args) -> pipeline.RunConfig:
    cfg = pipeline.load_config(args.config) if getattr(args, "config", None) else pipeline.RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None):
        cfg.out = args.out
    if getattr(args, "transform", None):
        cfg.transform = args.transform
    if getattr(args, "features", None):
        cfg.features = args.features
    if getattr(args, "runs", None) is not None:
        cfg.eval.n_runs = args.runs
    return cfg


def cmd_synth(args) -> int:
    cfg = _base_config(args)
    if args.per_class is not None:
        cfg.synth.n_per_class = args.per_class
    ds = synth.generate_dataset(cfg.synth, pipeline.stage_seed(cfg.seed, "synth"))
    ingest.save_dataset(ds, cfg.out)
    print(f"wrote {len(ds.graphs)} graphs to {cfg.out} ({ds.class_counts})")
    return 0


def cmd_ingest(args) -> int:
    cfg = _base_config(args)
    if not (args.records or args.fetch_base_url or getattr(args, "config", None)):
        raise ValueError("ingest needs --records, --fetch-base-url, or --config")
    if args.records:
        cfg.files.records = args.records
        cfg.files.format = args.format
        cfg.files.labels = args.labels
        cfg.source = "files"
    if args.fetch_base_url:
        cfg.fetch.base_url = args.fetch_base_url
        cfg.fetch.labels = args.labels
        cfg.source = "fetch"
    ds = pipeline._load_stage(cfg)
    ingest.save_dataset(ds, cfg.out)
    print(f"wrote {len(ds.graphs)} graphs to {cfg.out} ({ds.class_counts})")
    return 0


def cmd_transform(args) -> int:
    cfg = _base_config(args)
    ds = ingest.load_dataset(args.input)
    cfg.transform = args.transform or cfg.transform
    graphs, origins, kind = pipeline._transform_stage(cfg, ds)
    out_ds = ingest.Dataset.from_graphs(graphs, name=f"{ds.name}-{cfg.transform}")
    ingest.save_dataset(out_ds, cfg.out, origins=origins, kind=kind)
    print(f"wrote {len(graphs)} {cfg.transform} graphs to {cfg.out}")
    return 0


def cmd_features(args) -> int:
    cfg = _base_config(args)
    ds = ingest.load_dataset(args.input)
    os.makedirs(cfg.out, exist_ok=True)
    X, labels = pipeline._features_stage(cfg, ds.graphs, cfg.out)
    print(f"wrote features for {len(labels)} graphs to {cfg.out}/features.csv")
    return 0


def cmd_embed(args) -> int:
    args.features = "embed"
    return cmd_features(args)


def cmd_eval(args) -> int:
    cfg = _base_config(args)
    ids, labels, X, names = features_mod.read_features_csv(args.features_csv)
    report = forest_mod.evaluate(
        X,
        labels,
        n_runs=cfg.eval.n_runs,
        params=cfg.forest,
        seed=pipeline.stage_seed(cfg.seed, "evaluate"),
        split_fraction=cfg.eval.split_fraction,
        positive=cfg.eval.positive,
    )
    os.makedirs(cfg.out, exist_ok=True)
    with open(os.path.join(cfg.out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"F1 ({report.positive}-positive): {report.summary_cell()} over {report.n_runs} runs")
    return 0


def cmd_bench(args) -> int:
    cfg = _base_config(args)
    if args.input:
        graphs = ingest.load_dataset(args.input).graphs
    else:
        profile = replace(
            synth.PHISHING_DEFAULT,
            n_neighbors=(args.min_neighbors, args.max_neighbors),
            reciprocal_prob=0.0,
            noise=0.0,
        )
        graphs = [
            synth.generate_account_graph(profile, cfg.seed + i) for i in range(args.graphs)
        ]
    bench = pipeline.bench_construction(graphs, repetitions=args.repetitions)
    os.makedirs(cfg.out, exist_ok=True)
    pipeline.write_bench_csv(os.path.join(cfg.out, "bench.csv"), bench)
    with open(os.path.join(cfg.out, "bench_summary.json"), "w", encoding="utf-8") as fh:
        json.dump({"tsgn_over_dtsgn_time_ratio": bench["tsgn_over_dtsgn_time_ratio"]}, fh, indent=2)
        fh.write("\n")
    for row in bench["rows"]:
        print(
            f"{row['kind']:>6} [{row['backend']}] best {row['best_seconds']:.4f}s "
            f"edges {row['total_edges']}"
        )
    for backend_name, ratio in bench["tsgn_over_dtsgn_time_ratio"].items():
        print(f"tsgn/dtsgn time ratio [{backend_name}]: {ratio:.2f}x")
    return 0


def cmd_pipeline(args) -> int:
    cfg = _base_config(args)
    report, _ = pipeline.run_pipeline(cfg)
    print(
        f"F1 ({report.positive}-positive): {report.summary_cell()} over {report.n_runs} runs; "
        f"artifacts in {cfg.out}"
    )
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML or JSON config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="tsgn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled dataset")
    _add_common(p)
    p.add_argument("--per-class", type=int, default=None)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("ingest", help="build ego networks from files or a fetch API")
    _add_common(p)
    p.add_argument("--records", default=None, help="transactions file")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--labels", default=None, help="address,label CSV")
    p.add_argument("--fetch-base-url", default=None, help="fetch histories instead of reading records")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("transform", help="map a dataset to tsgn or dtsgn graphs")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--transform", choices=pipeline.TRANSFORMS, default=None)
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("features", help="extract handcrafted features or embeddings")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--features", choices=pipeline.FEATURE_METHODS, default=None)
    p.add_argument("--transform", choices=pipeline.TRANSFORMS, default=None,
                   help="kind of the input graphs (controls direction tags)")
    p.set_defaults(fn=cmd_features)

    p = sub.add_parser("embed", help="train whole-graph embeddings")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--transform", choices=pipeline.TRANSFORMS, default=None)
    p.set_defaults(fn=cmd_embed)

    p = sub.add_parser("eval", help="repeated-holdout F1 over a feature CSV")
    _add_common(p)
    p.add_argument("--features-csv", required=True)
    p.add_argument("--runs", type=int, default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("bench", help="time tsgn vs dtsgn construction")
    _add_common(p)
    p.add_argument("--in", dest="input", default=None, help="dataset directory (default: synthetic)")
    p.add_argument("--graphs", type=int, default=100)
    p.add_argument("--min-neighbors", type=int, default=200)
    p.add_argument("--max-neighbors", type=int, default=1000)
    p.add_argument("--repetitions", type=int, default=3)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("pipeline", help="run all stages end to end")
    _add_common(p)
    p.add_argument("--transform", choices=pipeline.TRANSFORMS, default=None)
    p.add_argument("--features", choices=pipeline.FEATURE_METHODS, default=None)
    p.add_argument("--runs", type=int, default=None)
    p.set_defaults(fn=cmd_pipeline)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError, pipeline.PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
