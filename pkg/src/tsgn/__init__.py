"""Transaction subgraph networks for address classification.

Converts per-address transaction ego networks into TSGN / Directed-TSGN
line graphs, extracts handcrafted or WL-skipgram features, and scores
phishing-vs-normal classification with a repeated-holdout random forest.
"""

from .accel import backend, set_backend
from .embed import EmbedParams, build_corpus, train_embeddings, wl_relabel
from .features import FEATURE_NAMES, handcrafted_vector
from .forest import ForestParams, evaluate, f1_score, predict, train_forest
from .graph import (
    TransactionRecord,
    TxGraph,
    aggregate_transactions,
    degrees,
    to_undirected,
)
from .ingest import Dataset, assemble_datasets, build_ego_network, parse_transaction_file
from .pipeline import RunConfig, bench_construction, run_pipeline
from .synth import GenProfile, SynthConfig, generate_account_graph, generate_dataset
from .transform import (
    LineGraphOutput,
    build_directed_tsgn,
    build_tsgn,
    initial_node_attributes,
    weight_map,
)

__version__ = "0.1.0"

__all__ = [
    "backend",
    "set_backend",
    "TxGraph",
    "TransactionRecord",
    "aggregate_transactions",
    "to_undirected",
    "degrees",
    "Dataset",
    "parse_transaction_file",
    "build_ego_network",
    "assemble_datasets",
    "GenProfile",
    "SynthConfig",
    "generate_account_graph",
    "generate_dataset",
    "LineGraphOutput",
    "build_tsgn",
    "build_directed_tsgn",
    "weight_map",
    "initial_node_attributes",
    "FEATURE_NAMES",
    "handcrafted_vector",
    "EmbedParams",
    "wl_relabel",
    "build_corpus",
    "train_embeddings",
    "ForestParams",
    "train_forest",
    "predict",
    "f1_score",
    "evaluate",
    "RunConfig",
    "run_pipeline",
    "bench_construction",
]
