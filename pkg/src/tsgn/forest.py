"""Random-forest classifier and the repeated random-holdout F1 protocol.

CART trees with Gini impurity, bootstrap sampling, and a random feature
subset per split; everything is seeded so a forest, and a whole evaluation,
reproduces exactly. Prediction is majority vote across trees with ties going
to the lexicographically smaller class label.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels


@dataclass
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None  # None = grow until pure / min_split
    min_split: int = 2
    feature_rule: str = "sqrt"  # "sqrt" | "all"
    seed: int = 0


@dataclass
class _Tree:
    feature: np.ndarray  # int64, -1 for leaves
    threshold: np.ndarray  # float64
    left: np.ndarray  # int64 child ids
    right: np.ndarray
    votes: np.ndarray  # (n_nodes, n_classes) int64 training counts
    leaf_class: np.ndarray  # int64 argmax of votes


@dataclass
class ForestModel:
    trees: list[_Tree]
    classes: list[str]
    n_features: int
    params: ForestParams


def _n_candidates(rule: str, d: int) -> int:
    if rule == "all":
        return d
    if rule == "sqrt":
        return max(1, int(np.sqrt(d)))
    raise ValueError(f"unknown feature rule {rule!r}")


def _build_tree(X, y_idx, n_classes, params, rng) -> _Tree:
    n = X.shape[0]
    sample = rng.integers(0, n, size=n)  # bootstrap
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    votes: list[np.ndarray] = []
    k = _n_candidates(params.feature_rule, X.shape[1])

    # depth-first with an explicit stack; left child expanded before right so
    # the rng draw order matches a preorder recursive build
    stack: list[tuple[np.ndarray, int, int, bool]] = [(sample, 0, -1, False)]
    while stack:
        idx, depth, parent, is_right = stack.pop()
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts = np.bincount(y_idx[idx], minlength=n_classes)
        votes.append(counts)
        if parent >= 0:
            if is_right:
                right[parent] = node
            else:
                left[parent] = node
        if (
            idx.shape[0] < params.min_split
            or (counts > 0).sum() <= 1
            or (params.max_depth is not None and depth >= params.max_depth)
        ):
            continue
        candidates = rng.permutation(X.shape[1])[:k]
        best_cost = np.inf
        best_feat = -1
        best_thr = 0.0
        for f in candidates:
            col = X[idx, f]
            order = np.argsort(col)
            cost, thr, found = _kernels.split_scan(
                col[order], y_idx[idx][order], n_classes
            )
            if found and cost < best_cost:
                best_cost, best_feat, best_thr = cost, int(f), thr
        if best_feat < 0:
            continue
        mask = X[idx, best_feat] < best_thr
        feature[node] = best_feat
        threshold[node] = best_thr
        stack.append((idx[~mask], depth + 1, node, True))
        stack.append((idx[mask], depth + 1, node, False))
    votes_arr = np.array(votes, dtype=np.int64)
    return _Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        votes=votes_arr,
        leaf_class=votes_arr.argmax(axis=1),
    )


def train_forest(X: np.ndarray, y, params: ForestParams) -> ForestModel:
    """Fit a seeded bagging ensemble of CART trees."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise ValueError("empty matrix")
    if X.shape[0] != y.shape[0]:
        raise ValueError("feature/label length mismatch")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    classes = sorted(set(y.tolist()))
    if len(classes) < 2:
        warnings.warn("single-class training set; forest will predict that class")
    lookup = {c: i for i, c in enumerate(classes)}
    y_idx = np.array([lookup[v] for v in y], dtype=np.int64)
    master = np.random.default_rng(params.seed)
    tree_seeds = master.integers(0, 2**63 - 1, size=params.n_trees)
    trees = [
        _build_tree(X, y_idx, len(classes), params, np.random.default_rng(int(s)))
        for s in tree_seeds
    ]
    return ForestModel(trees=trees, classes=classes, n_features=X.shape[1], params=params)


def _tree_route(tree: _Tree, X: np.ndarray) -> np.ndarray:
    cur = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    while True:
        f = tree.feature[cur]
        internal = f >= 0
        if not internal.any():
            return cur
        go_left = np.zeros(X.shape[0], dtype=bool)
        go_left[internal] = X[rows[internal], f[internal]] < tree.threshold[cur[internal]]
        cur = np.where(internal, np.where(go_left, tree.left[cur], tree.right[cur]), cur)


def predict(model: ForestModel, X: np.ndarray) -> np.ndarray:
    """Majority vote across trees; ties to the smaller class label."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(
            f"feature dimension mismatch: model has {model.n_features}, got {X.shape}"
        )
    counts = np.zeros((X.shape[0], len(model.classes)), dtype=np.int64)
    rows = np.arange(X.shape[0])
    for tree in model.trees:
        counts[rows, tree.leaf_class[_tree_route(tree, X)]] += 1
    picks = counts.argmax(axis=1)  # first max = lexicographically smaller class
    classes = np.array(model.classes)
    return classes[picks]


def f1_score(y_true, y_pred, positive: str = "phishing") -> float:
    """Harmonic mean of precision and recall; degenerate denominators give 0."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape[0] != y_pred.shape[0]:
        raise ValueError("length mismatch")
    tp = int(np.sum((y_true == positive) & (y_pred == positive)))
    fp = int(np.sum((y_true != positive) & (y_pred == positive)))
    fn = int(np.sum((y_true == positive) & (y_pred != positive)))
    if tp + fp == 0 or tp + fn == 0:
        return 0.0
    p = tp / (tp + fp)
    r = tp / (tp + fn)
    if p + r == 0:
        return 0.0
    return 2.0 * p * r / (p + r)


def macro_f1(y_true, y_pred) -> float:
    labels = sorted(set(np.asarray(y_true).tolist()))
    return float(np.mean([f1_score(y_true, y_pred, positive=c) for c in labels]))


@dataclass
class EvalReport:
    """Per-run F1 scores of a repeated stratified random-holdout protocol."""

    scores: list[float]
    macro_scores: list[float]
    n_runs: int
    split_fraction: float
    seed: int
    positive: str
    wall_times: dict[str, float] = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return float(np.mean(self.scores))

    @property
    def std(self) -> float:
        return float(np.std(self.scores))  # population std

    @property
    def std_sample(self) -> float:
        if len(self.scores) < 2:
            return 0.0
        return float(np.std(self.scores, ddof=1))

    @property
    def macro_mean(self) -> float:
        return float(np.mean(self.macro_scores))

    def summary_cell(self) -> str:
        return f"{100.0 * self.mean:.2f}±{100.0 * self.std:.2f}"

    def to_dict(self) -> dict:
        return {
            "scores": self.scores,
            "macro_scores": self.macro_scores,
            "mean": self.mean,
            "std": self.std,
            "std_sample": self.std_sample,
            "macro_mean": self.macro_mean,
            "n_runs": self.n_runs,
            "split_fraction": self.split_fraction,
            "seed": self.seed,
            "positive": self.positive,
            "summary": self.summary_cell(),
        }


def stratified_split(y: np.ndarray, test_fraction: float, rng) -> tuple[np.ndarray, np.ndarray]:
    """Per-class shuffle and slice; class balance preserved within 1 sample."""
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for c in sorted(set(y.tolist())):
        idx = np.flatnonzero(y == c)
        perm = idx[rng.permutation(idx.shape[0])]
        n_test = int(round(test_fraction * idx.shape[0]))
        if n_test == 0 or n_test == idx.shape[0]:
            raise ValueError(f"class {c!r} would have an empty train or test fold")
        test_idx.append(perm[:n_test])
        train_idx.append(perm[n_test:])
    return np.concatenate(train_idx), np.concatenate(test_idx)


def evaluate(
    X: np.ndarray,
    y,
    n_runs: int,
    params: ForestParams,
    seed: int,
    split_fraction: float = 0.1,
    positive: str = "phishing",
) -> EvalReport:
    """n_runs independent stratified holdouts; F1 with the given positive class."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    master = np.random.default_rng(seed)
    scores: list[float] = []
    macro_scores: list[float] = []
    t_train = 0.0
    t_predict = 0.0
    for _ in range(n_runs):
        split_seed, forest_seed = (int(s) for s in master.integers(0, 2**63 - 1, size=2))
        train_idx, test_idx = stratified_split(
            y, split_fraction, np.random.default_rng(split_seed)
        )
        t0 = time.perf_counter()
        model = train_forest(X[train_idx], y[train_idx], replace(params, seed=forest_seed))
        t1 = time.perf_counter()
        y_hat = predict(model, X[test_idx])
        t_predict += time.perf_counter() - t1
        t_train += t1 - t0
        scores.append(f1_score(y[test_idx], y_hat, positive=positive))
        macro_scores.append(macro_f1(y[test_idx], y_hat))
    return EvalReport(
        scores=scores,
        macro_scores=macro_scores,
        n_runs=n_runs,
        split_fraction=split_fraction,
        seed=seed,
        positive=positive,
        wall_times={"train": t_train, "predict": t_predict},
    )
