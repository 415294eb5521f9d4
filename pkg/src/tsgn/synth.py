"""Synthetic labeled ego networks with a controllable in/out imbalance.

Phishing-style centers receive most edges (funds converge on the account);
normal-style centers sit near a 50/50 split. Star topology by default, with
optional neighbor-neighbor links, log-normal amounts, optional reciprocal
edges, and a direction-flip noise rate.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .graph import TxGraph
from .ingest import Dataset


@dataclass
class GenProfile:
    label: str  # "phishing" | "normal"
    n_neighbors: tuple[int, int] = (15, 35)  # inclusive range
    in_fraction: float = 0.5  # fraction of neighbor edges directed into center
    amount_mu: float = 0.0  # log-normal parameters of edge amounts
    amount_sigma: float = 1.0
    reciprocal_prob: float = 0.0
    noise: float = 0.0  # probability of flipping each base edge's direction
    extra_edge_prob: float = 0.0  # neighbor-neighbor link probability

    def validate(self) -> None:
        lo, hi = self.n_neighbors
        if lo > hi or lo < 1:
            raise ValueError(f"degenerate neighbor range {self.n_neighbors}")
        for name in ("in_fraction", "reciprocal_prob", "noise", "extra_edge_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")


PHISHING_DEFAULT = GenProfile(label="phishing", in_fraction=0.9, reciprocal_prob=0.05)
NORMAL_DEFAULT = GenProfile(label="normal", in_fraction=0.5, reciprocal_prob=0.05)


def generate_account_graph(profile: GenProfile, seed: int) -> TxGraph:
    """One star-shaped ego network; deterministic per seed.

    With noise 0, exactly round(in_fraction * n) neighbors send to the
    center and the rest receive from it.
    """
    profile.validate()
    rng = np.random.default_rng(seed)
    lo, hi = profile.n_neighbors
    n = int(rng.integers(lo, hi + 1))
    n_in = int(round(profile.in_fraction * n))
    inbound = np.arange(n) < n_in
    flips = rng.random(n) < profile.noise
    inbound = inbound ^ flips
    amounts = rng.lognormal(profile.amount_mu, profile.amount_sigma, size=n)
    recip = rng.random(n) < profile.reciprocal_prob
    recip_amounts = rng.lognormal(profile.amount_mu, profile.amount_sigma, size=n)
    center = "center"
    peers = [f"peer{i:05d}" for i in range(n)]
    edges: list[tuple[str, str, float]] = []
    for i, peer in enumerate(peers):
        if inbound[i]:
            edges.append((peer, center, float(amounts[i])))
        else:
            edges.append((center, peer, float(amounts[i])))
        if recip[i]:
            if inbound[i]:
                edges.append((center, peer, float(recip_amounts[i])))
            else:
                edges.append((peer, center, float(recip_amounts[i])))
    if profile.extra_edge_prob > 0 and n > 1:
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < profile.extra_edge_prob:
                    a, b = (peers[i], peers[j]) if rng.random() < 0.5 else (peers[j], peers[i])
                    edges.append((a, b, float(rng.lognormal(profile.amount_mu, profile.amount_sigma))))
    return TxGraph.from_edge_list(
        edges, directed=True, center=center, label=profile.label, nodes=[center, *peers]
    )


@dataclass
class SynthConfig:
    n_per_class: int = 500
    phishing: GenProfile = None  # type: ignore[assignment]
    normal: GenProfile = None  # type: ignore[assignment]
    name: str = "synthetic"

    def __post_init__(self) -> None:
        if self.phishing is None:
            self.phishing = replace(PHISHING_DEFAULT)
        if self.normal is None:
            self.normal = replace(NORMAL_DEFAULT)


def generate_dataset(config: SynthConfig, seed: int) -> Dataset:
    """Balanced dataset; graph i uses seed + i, so generation parallelizes."""
    if config.n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    graphs = []
    for i in range(config.n_per_class):
        graphs.append(generate_account_graph(config.phishing, seed + i))
    for i in range(config.n_per_class):
        graphs.append(generate_account_graph(config.normal, seed + config.n_per_class + i))
    return Dataset.from_graphs(graphs, name=config.name)
