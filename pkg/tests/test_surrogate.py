"""Regression tree and bagged-forest tests against brute-force oracles."""

import itertools

import numpy as np
import pytest

from forge import surrogate
from forge.surrogate import (EnsembleConfig, TreeParams, evaluate,
                             fit_ensemble, fit_tree, load_ensemble,
                             save_ensemble)


def _exhaustive_best_split(X, y):
    """Try every (feature, midpoint) split; return minimal total SSE."""
    best = None
    for j in range(X.shape[1]):
        vals = np.unique(X[:, j])
        for a, b in zip(vals, vals[1:]):
            thr = 0.5 * (a + b)
            lo, hi = y[X[:, j] <= thr], y[X[:, j] > thr]
            sse = ((lo - lo.mean()) ** 2).sum() + ((hi - hi.mean()) ** 2).sum()
            key = (sse, j, thr)
            if best is None or key < best:
                best = key
    return best


def test_best_split_matches_exhaustive_oracle():
    rng = np.random.default_rng(0)
    for _ in range(30):
        X = rng.normal(size=(20, 3))
        y = rng.normal(size=20)
        sse, j, thr = _exhaustive_best_split(X, y)
        tree = fit_tree(X, y, TreeParams(max_depth=1, feature_subsample=3))
        assert tree.feature[0] == j
        assert tree.threshold[0] == pytest.approx(thr, rel=1e-12)


def test_single_tree_memorizes_distinct_rows():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(40, 4))
    y = rng.normal(size=40)
    tree = fit_tree(X, y, TreeParams(feature_subsample=4))
    assert np.allclose(tree.predict(X), y, atol=1e-12)


def test_tree_respects_depth_and_leaf_size():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(100, 3))
    y = rng.normal(size=100)
    tree = fit_tree(X, y, TreeParams(max_depth=3, feature_subsample=3))
    assert tree.max_depth() <= 3
    tree2 = fit_tree(X, y, TreeParams(min_leaf=10, feature_subsample=3))
    leaves = tree2.feature == -1
    assert tree2.n_samples[leaves].min() >= 10


def test_tree_prediction_is_leaf_mean():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([1.0, 3.0, 10.0, 12.0])
    tree = fit_tree(X, y, TreeParams(max_depth=1, feature_subsample=1))
    # best split at 1.5: left mean 2, right mean 11
    assert tree.threshold[0] == pytest.approx(1.5)
    assert tree.predict(np.array([[0.5]]))[0] == pytest.approx(2.0)
    assert tree.predict(np.array([[2.5]]))[0] == pytest.approx(11.0)


def test_ensemble_prediction_is_mean_of_fold_means():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(60, 3))
    y = X @ np.array([1.0, -2.0, 0.5]) + rng.normal(scale=0.1, size=60)
    cfg = EnsembleConfig(n_folds=3, n_trees=4, max_depth=4, seed=9)
    e = fit_ensemble(X, y, cfg)
    assert len(e.folds) == 3 and all(len(f) == 4 for f in e.folds)
    pt = X[:5]
    manual = np.mean(
        [np.mean([t.predict(pt) for t in fold], axis=0) for fold in e.folds],
        axis=0)
    assert np.allclose(e.predict_scaled(pt), manual, atol=1e-12)
    assert np.allclose(e.predict(pt),
                       e.y_min + manual * (e.y_max - e.y_min), atol=1e-10)


def test_fit_ensemble_is_deterministic():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(50, 3))
    y = rng.normal(size=50)
    cfg = EnsembleConfig(n_folds=2, n_trees=3, max_depth=3, seed=11)
    a = fit_ensemble(X, y, cfg)
    b = fit_ensemble(X, y, cfg)
    probe = rng.normal(size=(10, 3))
    assert np.array_equal(a.predict(probe), b.predict(probe))


def test_constant_target_rejected():
    X = np.zeros((10, 2))
    with pytest.raises(ValueError):
        fit_ensemble(X, np.ones(10), EnsembleConfig(n_folds=2, n_trees=1))


def test_metrics_hand_values():
    y = np.array([0.0, 1.0, 2.0])
    pred = np.array([0.0, 2.0, 2.0])
    m = evaluate(y, pred)
    assert m.rmse == pytest.approx(np.sqrt(1.0 / 3.0))
    assert m.r2 == pytest.approx(0.5)
    with pytest.raises(ValueError):
        evaluate(np.ones(3), pred)


def test_serialization_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    X = rng.normal(size=(40, 4))
    y = X[:, 0] * 2 + rng.normal(scale=0.1, size=40)
    cfg = EnsembleConfig(n_folds=2, n_trees=3, max_depth=5, seed=1)
    e = fit_ensemble(X, y, cfg, feature_names=[f"f{i}" for i in range(4)])
    save_ensemble(e, tmp_path / "e.json")
    e2 = load_ensemble(tmp_path / "e.json")
    probe = rng.normal(size=(15, 4))
    assert np.array_equal(e.predict(probe), e2.predict(probe))
    assert e2.feature_names == e.feature_names
    assert e2.config.n_folds == 2 and e2.config.n_trees == 3


def test_feature_subsample_default_uses_third_of_features():
    # with p=9 the default subsample is ceil(9/3)=3; a tree fitted with a
    # fixed seed must only ever split on features it was offered, which we
    # check indirectly: over many seeds all 9 features appear eventually.
    rng = np.random.default_rng(6)
    X = rng.normal(size=(80, 9))
    y = rng.normal(size=80)
    seen = set()
    for seed in range(20):
        tree = fit_tree(X, y, TreeParams(max_depth=2, seed=seed))
        seen |= set(tree.feature[tree.feature >= 0].tolist())
    assert seen <= set(range(9)) and len(seen) > 3
