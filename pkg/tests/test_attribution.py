"""Exact tree Shapley attribution: oracle equivalence and axioms."""

import numpy as np
import pytest

from forge import attribution, surrogate
from forge.attribution import (covers, ensemble_shap, expected_value,
                               global_importance, tree_shap, tree_shap_fast)
from forge.surrogate import EnsembleConfig, TreeParams, fit_ensemble, fit_tree
from tests.oracles import exhaustive_shapley, tree_conditional_expectation


def _random_tree(rng, n_features=4, max_depth=3, n=40):
    X = rng.normal(size=(n, n_features))
    y = rng.normal(size=n)
    tree = fit_tree(X, y, TreeParams(max_depth=max_depth,
                                     feature_subsample=n_features,
                                     seed=int(rng.integers(1 << 30))))
    return tree, X


def test_oracle_equivalence_100_random_trees():
    """Path-algorithm values equal brute-force Shapley summation, 1e-8."""
    rng = np.random.default_rng(7)
    for _ in range(100):
        p = int(rng.integers(2, 5))
        depth = int(rng.integers(1, 4))
        tree, X = _random_tree(rng, n_features=p, max_depth=depth)
        bg = X  # the training set reaches every internal node by construction
        cover = covers(tree, bg)
        x = rng.normal(size=p)
        phi = tree_shap(tree, x, bg, cover)
        oracle = exhaustive_shapley(tree, cover, x, p)
        assert np.max(np.abs(phi - oracle)) <= 1e-8


def test_fast_kernel_bit_identical_to_reference():
    rng = np.random.default_rng(8)
    for _ in range(40):
        tree, X = _random_tree(rng, n_features=5, max_depth=6, n=80)
        x = rng.normal(size=5)
        a = tree_shap(tree, x, X)
        b = tree_shap_fast(tree, x, X)
        assert np.array_equal(a, b)


def test_local_accuracy_single_tree():
    rng = np.random.default_rng(9)
    tree, X = _random_tree(rng, n_features=4, max_depth=5, n=60)
    cover = covers(tree, X)
    base = expected_value(tree, cover)
    for x in rng.normal(size=(50, 4)):
        phi = tree_shap(tree, x, X, cover)
        assert base + phi.sum() == pytest.approx(
            float(tree.predict(x[None, :])[0]), abs=1e-8)


def test_missing_feature_gets_exact_zero():
    """A feature the tree never splits on must receive phi identically 0."""
    rng = np.random.default_rng(10)
    X = rng.normal(size=(50, 4))
    y = 3.0 * X[:, 1] - 2.0 * X[:, 3]  # features 0 and 2 are pure noise inputs
    tree = fit_tree(X, y, TreeParams(max_depth=4, feature_subsample=4))
    used = set(tree.feature[tree.feature >= 0].tolist())
    unused = set(range(4)) - used
    assert unused, "fixture needs at least one unused feature"
    for x in rng.normal(size=(20, 4)):
        phi = tree_shap(tree, x, X)
        for j in unused:
            assert phi[j] == 0.0


def test_expected_value_is_cover_weighted_leaf_mean():
    rng = np.random.default_rng(11)
    tree, X = _random_tree(rng, n_features=3, max_depth=3)
    cover = covers(tree, X)
    # equals the conditional expectation with an empty coalition
    empty = tree_conditional_expectation(tree, cover, np.zeros(3), set())
    assert expected_value(tree, cover) == pytest.approx(empty, rel=1e-12)
    # and equals the mean prediction over the background itself
    assert expected_value(tree, cover) == pytest.approx(
        float(tree.predict(X).mean()), rel=1e-10)


def test_covers_rejects_empty_and_unreached():
    rng = np.random.default_rng(12)
    tree, X = _random_tree(rng, n_features=3, max_depth=2)
    with pytest.raises(ValueError):
        covers(tree, X[:0])
    # a background far to one side leaves some internal node unreached
    far = np.full((5, 3), 1e9)
    if tree.n_nodes > 3:
        with pytest.raises(ValueError):
            covers(tree, far)


def test_ensemble_shap_additivity_and_scaling():
    rng = np.random.default_rng(13)
    X = rng.normal(size=(80, 5))
    y = X @ np.array([2.0, -1.0, 0.0, 0.5, 0.0]) + 10.0
    e = fit_ensemble(X, y, EnsembleConfig(n_folds=2, n_trees=5, max_depth=6,
                                          seed=3),
                     feature_names=[f"f{j}" for j in range(5)])
    attr = ensemble_shap(e, X, n_samples=12, seed=0)
    assert attr.phi.shape == (12, 5)
    pred = e.predict(X[attr.sample_index])
    recon = attr.phi0 + attr.phi.sum(axis=1)
    assert np.max(np.abs(recon - pred)) <= 1e-8


def test_ensemble_shap_deterministic_subsample():
    rng = np.random.default_rng(14)
    X = rng.normal(size=(60, 3))
    y = X[:, 0] + 0.1 * rng.normal(size=60)
    e = fit_ensemble(X, y, EnsembleConfig(n_folds=2, n_trees=3, max_depth=4,
                                          seed=5))
    a = ensemble_shap(e, X, n_samples=10, seed=21)
    b = ensemble_shap(e, X, n_samples=10, seed=21)
    assert np.array_equal(a.phi, b.phi)
    assert np.array_equal(a.sample_index, b.sample_index)


def test_global_importance_ranks_true_drivers_first():
    rng = np.random.default_rng(15)
    X = rng.normal(size=(150, 4))
    y = 5.0 * X[:, 2] + 2.0 * X[:, 0]
    e = fit_ensemble(X, y, EnsembleConfig(n_folds=2, n_trees=10, max_depth=6,
                                          seed=7),
                     feature_names=["a", "b", "c", "d"])
    attr = ensemble_shap(e, X, n_samples=30, seed=1)
    ranked = global_importance(attr)
    assert ranked[0][0] == "c"
    assert ranked[1][0] == "a"
    payload = attribution.shap_prompt_payload(attr, top_k=2)
    assert [f["name"] for f in payload["top_features"]] == ["c", "a"]
