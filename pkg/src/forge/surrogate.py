"""Bagged regression-tree surrogate for scenario outputs.

Trees are grown greedily on variance reduction with per-node feature
subsampling; the ensemble averages K independently trained forests fitted
on seeded subsamples of the data.  Targets are min-max scaled to [0, 1]
internally and predictions mapped back to original units.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SERIAL_VERSION = 1


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = None
    min_leaf: int = 1
    feature_subsample: int | None = None  # None -> ceil(p / 3)
    seed: int = 0


@dataclass
class RegressionTree:
    """Array-encoded binary tree; feature == -1 marks a leaf."""

    feature: np.ndarray     # (nodes,) int
    threshold: np.ndarray   # (nodes,) float
    left: np.ndarray        # (nodes,) int
    right: np.ndarray       # (nodes,) int
    value: np.ndarray       # (nodes,) float, mean target of training rows
    n_samples: np.ndarray   # (nodes,) int, training rows routed through node

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        idx = np.zeros(X.shape[0], dtype=int)
        while True:
            internal = self.feature[idx] >= 0
            if not internal.any():
                break
            rows = np.flatnonzero(internal)
            node = idx[rows]
            go_left = X[rows, self.feature[node]] <= self.threshold[node]
            idx[rows] = np.where(go_left, self.left[node], self.right[node])
        return self.value[idx]

    def max_depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[i] + 1
                depth[self.right[i]] = depth[i] + 1
        return int(depth.max()) if self.n_nodes else 0


def _best_split(X: np.ndarray, y: np.ndarray, cols: np.ndarray,
                min_leaf: int) -> tuple[int, float] | None:
    """Exhaustive variance-reduction scan over candidate columns.

    Returns (feature, threshold) minimizing the summed child squared error,
    with deterministic ties: lowest feature index, then lowest threshold.
    """
    n = y.size
    best: tuple[float, int, float] | None = None
    for j in cols:
        order = np.argsort(X[:, j], kind="stable")
        xs, ys = X[order, j], y[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys * ys)
        total, total_sq = csum[-1], csq[-1]
        for k in range(min_leaf, n - min_leaf + 1):
            if k == n or xs[k - 1] == xs[k]:
                continue
            lsum, lsq = csum[k - 1], csq[k - 1]
            sse = (lsq - lsum * lsum / k) \
                + (total_sq - lsq - (total - lsum) ** 2 / (n - k))
            thr = 0.5 * (xs[k - 1] + xs[k])
            key = (sse, int(j), thr)
            if best is None or key < best:
                best = key
    if best is None:
        return None
    sse, j, thr = best
    base = float(np.var(y)) * n
    if base - sse <= 1e-12 * (base + 1.0):
        return None
    return j, thr


def fit_tree(X: np.ndarray, y: np.ndarray, params: TreeParams = TreeParams()
             ) -> RegressionTree:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    rng = np.random.default_rng(params.seed)
    k_feats = params.feature_subsample or math.ceil(p / 3)
    k_feats = min(k_feats, p)

    feature, threshold, left, right, value, counts = [], [], [], [], [], []

    # explicit stack instead of recursion: deep chains on min_leaf=1 trees
    # can exceed the interpreter recursion limit
    stack: list[tuple[np.ndarray, int, int, bool]] = [(np.arange(n), 0, -1, False)]
    while stack:
        rows, depth, parent, is_left = stack.pop()
        node = len(feature)
        if parent >= 0:
            (left if is_left else right)[parent] = node
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[rows].mean()))
        counts.append(rows.size)
        if (params.max_depth is not None and depth >= params.max_depth) \
                or rows.size < 2 * params.min_leaf or np.ptp(y[rows]) == 0.0:
            continue
        cols = np.sort(rng.choice(p, size=k_feats, replace=False))
        split = _best_split(X[rows], y[rows], cols, params.min_leaf)
        if split is None:
            continue
        j, thr = split
        feature[node], threshold[node] = j, thr
        mask = X[rows, j] <= thr
        # push right first so the left child is materialized next (preorder)
        stack.append((rows[~mask], depth + 1, node, False))
        stack.append((rows[mask], depth + 1, node, True))
    return RegressionTree(np.array(feature), np.array(threshold),
                          np.array(left), np.array(right),
                          np.array(value), np.array(counts))


@dataclass(frozen=True)
class EnsembleConfig:
    n_folds: int = 10
    n_trees: int = 50
    max_depth: int | None = None
    min_leaf: int = 1
    feature_subsample: int | None = None
    seed: int = 0


@dataclass
class ForestEnsemble:
    """K forests of bagged trees plus the target scaling record."""

    config: EnsembleConfig
    folds: list[list[RegressionTree]]
    y_min: float
    y_max: float
    feature_names: list[str] = field(default_factory=list)
    training_X: np.ndarray | None = None

    def predict_scaled(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        acc = np.zeros(X.shape[0])
        for forest in self.folds:
            fold_acc = np.zeros(X.shape[0])
            for tree in forest:
                fold_acc += tree.predict(X)
            acc += fold_acc / len(forest)
        return acc / len(self.folds)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.y_min + self.predict_scaled(X) * (self.y_max - self.y_min)


def fit_ensemble(X: np.ndarray, y: np.ndarray,
                 config: EnsembleConfig = EnsembleConfig(),
                 feature_names: list[str] | None = None) -> ForestEnsemble:
    """Train K forests on seeded subsamples of (X, y).

    Each fold draws a without-replacement subsample of size (1 - 1/K)·n;
    each tree inside a fold bootstraps that subsample with replacement.
    The target is min-max scaled to [0, 1] before fitting.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    y_min, y_max = float(y.min()), float(y.max())
    if y_max <= y_min:
        raise ValueError("target is constant; nothing to learn")
    ys = (y - y_min) / (y_max - y_min)
    rng = np.random.default_rng(config.seed)
    fold_size = max(1, round(n * (1 - 1 / config.n_folds)))
    folds: list[list[RegressionTree]] = []
    for _ in range(config.n_folds):
        sub = rng.choice(n, size=fold_size, replace=False)
        trees = []
        for _ in range(config.n_trees):
            boot = rng.choice(sub, size=fold_size, replace=True)
            params = TreeParams(config.max_depth, config.min_leaf,
                                config.feature_subsample,
                                seed=int(rng.integers(2**31 - 1)))
            trees.append(fit_tree(X[boot], ys[boot], params))
        folds.append(trees)
    return ForestEnsemble(config, folds, y_min, y_max,
                          feature_names or [], training_X=X)


@dataclass(frozen=True)
class RegressionMetrics:
    rmse: float
    r2: float


def evaluate(y_true: np.ndarray, y_pred: np.ndarray) -> RegressionMetrics:
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    resid = y_true - y_pred
    rmse = float(np.sqrt(np.mean(resid**2)))
    ss_tot = float(np.sum((y_true - y_true.mean())**2))
    if ss_tot == 0.0:
        raise ValueError("R^2 undefined for a constant target")
    return RegressionMetrics(rmse, 1.0 - float(resid @ resid) / ss_tot)


def _tree_dict(tree: RegressionTree) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "value": tree.value.tolist(),
        "n_samples": tree.n_samples.tolist(),
    }


def _tree_from_dict(d: dict) -> RegressionTree:
    return RegressionTree(
        np.array(d["feature"], dtype=int), np.array(d["threshold"], dtype=float),
        np.array(d["left"], dtype=int), np.array(d["right"], dtype=int),
        np.array(d["value"], dtype=float), np.array(d["n_samples"], dtype=int))


def save_ensemble(e: ForestEnsemble, path: str | Path) -> None:
    doc = {
        "version": SERIAL_VERSION,
        "config": {
            "n_folds": e.config.n_folds, "n_trees": e.config.n_trees,
            "max_depth": e.config.max_depth, "min_leaf": e.config.min_leaf,
            "feature_subsample": e.config.feature_subsample, "seed": e.config.seed,
        },
        "y_min": e.y_min, "y_max": e.y_max,
        "feature_names": e.feature_names,
        "folds": [[_tree_dict(t) for t in forest] for forest in e.folds],
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True))


def load_ensemble(path: str | Path) -> ForestEnsemble:
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != SERIAL_VERSION:
        raise ValueError(f"unsupported ensemble version: {doc.get('version')}")
    config = EnsembleConfig(**doc["config"])
    folds = [[_tree_from_dict(t) for t in forest] for forest in doc["folds"]]
    return ForestEnsemble(config, folds, doc["y_min"], doc["y_max"],
                          list(doc["feature_names"]), training_X=None)
