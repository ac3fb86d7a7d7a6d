"""Correlation and hierarchical-clustering tests against naive oracles."""

import numpy as np
import pytest

from forge import similarity
from tests.oracles import upgma_reference


def test_zscore_unit_moments():
    rng = np.random.default_rng(1)
    m = rng.normal(3.0, 2.0, size=(40, 5))
    z = similarity.zscore(m)
    assert np.allclose(z.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(z.std(axis=0, ddof=1), 1.0, atol=1e-12)


def test_zscore_constant_column_maps_to_zero():
    m = np.column_stack([np.full(10, 4.2), np.arange(10.0)])
    z = similarity.zscore(m)
    assert np.all(z[:, 0] == 0.0)
    assert z[:, 1].std(ddof=1) == pytest.approx(1.0)


def test_zscore_near_constant_broadcast_column():
    # a column produced by broadcasting the same float must be treated as
    # constant even when its mean carries rounding residue
    v = np.full(64, 0.1 + 0.2)
    z = similarity.zscore(np.column_stack([v, np.arange(64.0)]))
    assert np.all(z[:, 0] == 0.0)


def test_pearson_hand_values():
    a = np.array([1.0, 2.0, 3.0, 4.0])
    assert similarity.pearson(a, 2 * a + 1) == pytest.approx(1.0)
    assert similarity.pearson(a, -a) == pytest.approx(-1.0)
    b = np.array([1.0, -1.0, 1.0, -1.0])
    c = np.array([1.0, 1.0, -1.0, -1.0])
    assert similarity.pearson(b, c) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(similarity.ConstantVectorError):
        similarity.pearson(a, np.full(4, 2.0))


def test_scenario_correlation_self_is_one():
    rng = np.random.default_rng(2)
    mats = {f"S{i:02d}": rng.normal(size=(8, 3)) for i in range(1, 5)}
    corr = similarity.scenario_correlation(mats)
    assert np.allclose(np.diag(corr.rho), 1.0)
    assert np.allclose(corr.rho, corr.rho.T)
    # uniformly scaled copies correlate exactly at 1 after per-matrix z-score
    mats["S05"] = 1.7 * mats["S01"]
    corr = similarity.scenario_correlation(mats)
    i, j = corr.ids.index("S01"), corr.ids.index("S05")
    assert corr.rho[i, j] == pytest.approx(1.0, abs=1e-12)


def test_scenario_correlation_3d_tensor_flattening():
    rng = np.random.default_rng(3)
    t = rng.normal(size=(4, 2, 3))
    corr = similarity.scenario_correlation({"a": t, "b": t.copy()})
    assert corr.rho[0, 1] == pytest.approx(1.0)


def test_to_dissimilarity():
    rho = np.array([[1.0, 0.5], [0.5, 1.0]])
    d = similarity.to_dissimilarity(similarity.CorrelationMatrix(["a", "b"], rho))
    assert d.shape == (1,)  # condensed upper triangle
    assert d[0] == pytest.approx(0.5)


def test_upgma_oracle_200_random_instances():
    """Merge-for-merge equality with a naive recompute-everything reference."""
    rng = np.random.default_rng(42)
    for _ in range(200):
        n = int(rng.integers(3, 11))
        pts = rng.normal(size=(n, 3))
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        merges = similarity.average_linkage(d[np.triu_indices(n, 1)])
        expected = upgma_reference(d)
        assert len(merges) == n - 1
        for got, ref in zip(merges, expected):
            assert got[0] == ref[0] and got[1] == ref[1]
            assert got[2] == pytest.approx(ref[2], rel=1e-10, abs=1e-12)
            assert got[3] == ref[3]


def test_upgma_matches_scipy_heights():
    from scipy.cluster.hierarchy import linkage
    from scipy.spatial.distance import squareform
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(9, 4))
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    merges = similarity.average_linkage(d[np.triu_indices(9, 1)])
    ref = linkage(squareform(d, checks=False), method="average")
    assert np.allclose([m[2] for m in merges], ref[:, 2], rtol=1e-10)


def test_flat_clusters_cut_levels():
    # two tight pairs far apart
    d = np.array([
        [0.0, 0.1, 5.0, 5.0],
        [0.1, 0.0, 5.0, 5.0],
        [5.0, 5.0, 0.0, 0.2],
        [5.0, 5.0, 0.2, 0.0],
    ])
    merges = similarity.average_linkage(d[np.triu_indices(4, 1)])
    labels = similarity.flat_clusters(merges, t=1.0, n=4)
    assert labels[0] == labels[1] and labels[2] == labels[3]
    assert labels[0] != labels[2]
    assert similarity.flat_clusters(merges, t=10.0, n=4).max() == 1
    assert similarity.flat_clusters(merges, t=0.01, n=4).max() == 4


def test_extremal_pairs():
    rho = np.array([
        [1.0, 0.9, 0.1],
        [0.9, 1.0, 0.4],
        [0.1, 0.4, 1.0],
    ])
    corr = similarity.CorrelationMatrix(["a", "b", "c"], rho)
    most, least = similarity.extremal_pairs(corr, k=1)
    assert most[0][:2] == ("a", "b") and most[0][2] == pytest.approx(0.9)
    assert least[0][:2] == ("a", "c") and least[0][2] == pytest.approx(0.1)


def test_intra_cluster_mean_hand_value():
    rho = np.array([
        [1.0, 0.9, 0.0],
        [0.9, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ])
    corr = similarity.CorrelationMatrix(["a", "b", "c"], rho)
    labels = np.array([1, 1, 2])
    # cluster 1 block mean incl. diagonal: (1 + 0.9 + 0.9 + 1) / 4 = 0.95
    assert similarity.intra_cluster_mean(corr, labels, 1) == pytest.approx(0.95)
    assert similarity.intra_cluster_mean(corr, labels, 2) == pytest.approx(1.0)


def test_desk_input_scenarios_form_single_cluster(fm_bank):
    from forge import pipeline
    mats = pipeline.scenario_feature_matrices(fm_bank)
    corr = similarity.scenario_correlation(mats)
    assert min(corr.off_diagonal()) >= 0.98
    merges = similarity.average_linkage(similarity.to_dissimilarity(corr))
    labels = similarity.flat_clusters(merges, t=0.5, n=26)
    assert labels.max() == 1
