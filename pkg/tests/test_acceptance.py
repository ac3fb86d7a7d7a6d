"""Acceptance gate: one test per release criterion, tolerances pinned.

These tests exercise the package end to end — solver, domain model,
scenario banks, features, clustering, surrogate, attribution, query
pipeline, and artifact determinism — at the desk and full scales.
"""

import hashlib
import json
import time
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse
from click.testing import CliRunner

from forge import (attribution, bank as bankmod, features, lp as lpmod,
                   model, narrator, pipeline, similarity, surrogate)
from forge.cli import main as cli_main
from tests.oracles import (exhaustive_shapley, upgma_reference,
                           vertex_enumeration_optimum)

QUERY_CO2 = "What happens if CO2 price increases by 20%?"
QUERY_INV = "What happens if cost of investment in agriculture i.e. costInvAgri decreases?"


# --------------------------------------------------------------------------
# full-scale fixtures shared by the feasibility and dispersion criteria
# --------------------------------------------------------------------------

@pytest.fixture(scope="module")
def full_sets():
    return model.SetsSpec.full_size()


@pytest.fixture(scope="module")
def full_fm_bank(full_sets):
    return bankmod.generate_bank("fm", full_sets, seed=7)


@pytest.fixture(scope="module")
def full_agri_bank(full_sets):
    return bankmod.generate_bank("agri", full_sets, seed=7)


@pytest.fixture(scope="module")
def full_agri_runs(full_agri_bank):
    return bankmod.run_bank(full_agri_bank, workers=4)


@pytest.fixture(scope="module")
def desk_table(fm_bank, fm_runs):
    return pipeline.build_learning_table(fm_bank, fm_runs, "capFMs")


@pytest.fixture(scope="module")
def desk_surrogate(desk_table):
    t0 = time.time()
    trained = pipeline.train_surrogate(desk_table)  # K=10 folds, 50 trees
    return trained, time.time() - t0


# --------------------------------------------------------------------------
# 1. LP correctness against the vertex-enumeration oracle
# --------------------------------------------------------------------------

def test_lp_matches_vertex_oracle_on_50_random_instances():
    rng = np.random.default_rng(1234)
    t0 = time.time()
    compared = 0
    for _ in range(50):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(2, max(3, 9 - n)))
        A_ineq = rng.normal(size=(m, n))
        x_feas = rng.uniform(0.5, 2.0, size=n)
        b_ineq = A_ineq @ x_feas - rng.uniform(0.1, 1.0, size=m)
        ub = x_feas + rng.uniform(1.0, 3.0, size=n)
        # bound the feasible region so the optimum is a vertex
        A = np.vstack([A_ineq, -np.eye(n)])
        b = np.concatenate([b_ineq, -ub])
        c = rng.normal(size=n)
        prob = model.StandardFormLP(
            c, scipy.sparse.csr_matrix(A), b,
            {("x", j): j for j in range(n)},
            {("row", i): i for i in range(A.shape[0])})
        out = lpmod.solve(prob)
        oracle = vertex_enumeration_optimum(c, A, b)
        if oracle is None:
            continue
        assert out.status == "Optimal"
        denom = max(1.0, abs(oracle))
        assert abs(out.objective - oracle) / denom <= 1e-8
        compared += 1
    elapsed = time.time() - t0
    assert compared >= 40
    assert elapsed < 5.0, f"50-instance comparison took {elapsed:.2f}s"


# --------------------------------------------------------------------------
# 2. Model feasibility at both scales
# --------------------------------------------------------------------------

def _solve_instance(data):
    prob = model.build_lp(data)
    out = lpmod.solve(prob)
    assert out.status == "Optimal"
    return model.solution_from_x(prob, data, out.x, out.objective)


def test_desk_scale_feasibility(desk_baseline):
    sol = _solve_instance(desk_baseline)
    report = model.validate(desk_baseline, sol)
    assert report.max_violation <= 1e-6
    entry = report.family("peatland")[0]
    family, index, lhs, rhs, slack, ok = entry
    assert index == (2030,)
    assert rhs == pytest.approx(5e6)
    assert lhs >= rhs - 1e-6 and ok


def test_full_scale_feasibility_under_60s(full_sets):
    data = model.synthesize_baseline(full_sets, seed=7)
    t0 = time.time()
    sol = _solve_instance(data)
    elapsed = time.time() - t0
    report = model.validate(data, sol)
    assert report.max_violation <= 1e-6
    _, _, lhs, rhs, _, ok = report.family("peatland")[0]
    assert lhs >= rhs - 1e-6 and ok
    assert elapsed < 60.0, f"full-size solve took {elapsed:.2f}s"


# --------------------------------------------------------------------------
# 3. Scenario-bank fidelity (delegated golden tables live in test_bank.py)
# --------------------------------------------------------------------------

def test_bank_fidelity_all_52_scenarios(fm_bank, agri_bank):
    from tests.test_bank import AGRI_GOLDEN, FM_GOLDEN
    for b, golden in ((fm_bank, FM_GOLDEN), (agri_bank, AGRI_GOLDEN)):
        assert len(b.recipes) == 26
        for recipe in b.recipes:
            assert recipe.multipliers == golden[recipe.scenario_id]
            data = bankmod.materialize(b.baseline, recipe)
            for name, attr in model.PARAMETER_TENSORS.items():
                if attr is None:
                    continue
                before = getattr(b.baseline, attr)
                after = getattr(data, attr)
                same = hashlib.sha256(before.tobytes()).hexdigest() == \
                    hashlib.sha256(after.tobytes()).hexdigest()
                factor = recipe.multipliers.get(name, 1.0)
                assert same == (factor == 1.0), \
                    (b.bank, recipe.scenario_id, name)


# --------------------------------------------------------------------------
# 4. Feature shapes and anchored cells
# --------------------------------------------------------------------------

def test_feature_shapes_and_anchors(full_sets):
    data = model.synthesize_baseline(full_sets, seed=0)
    fm = features.assemble(data, "fm")
    agri = features.assemble(data, "agri")
    assert fm.shape == (112, 25)
    assert agri.shape == (96, 21)
    r, f = "DE2", "FM04_DouglasFir"
    assert fm.cell(r, f, "GHG_2020") == pytest.approx(11.52, abs=1e-9)
    assert fm.cell(r, f, "CO2_2020") == pytest.approx(20.0, abs=1e-9)
    assert fm.cell(r, f, "CO2_2050") == pytest.approx(249.197564, abs=1e-6)
    assert fm.cell(r, f, "ForestGrowth_Slope") == pytest.approx(0.0, abs=1e-12)


# --------------------------------------------------------------------------
# 5. Clustering oracle
# --------------------------------------------------------------------------

def test_clustering_oracle_200_instances_exact():
    rng = np.random.default_rng(77)
    for _ in range(200):
        n = int(rng.integers(3, 11))
        pts = rng.normal(size=(n, 3))
        d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
        got = similarity.average_linkage(d[np.triu_indices(n, 1)])
        ref = upgma_reference(d)
        for g, r in zip(got, ref):
            assert (g[0], g[1], g[3]) == (r[0], r[1], r[3])
            assert g[2] == pytest.approx(r[2], rel=1e-10, abs=1e-12)


def test_flat_cut_above_max_height_is_one_26_cluster(fm_bank):
    art = pipeline.cluster_bank(fm_bank, space="input")
    max_h = float(art.linkage[:, 2].max())
    labels = similarity.flat_clusters(art.linkage, t=max_h + 1.0, n=26)
    assert labels.max() == 1
    assert int((labels == 1).sum()) == 26


# --------------------------------------------------------------------------
# 6. Dispersion property on the full synthesized bank
# --------------------------------------------------------------------------

def test_fm_input_correlations_tight(full_fm_bank):
    mats = pipeline.scenario_feature_matrices(full_fm_bank)
    corr = similarity.scenario_correlation(mats)
    assert min(corr.off_diagonal()) >= 0.98


def test_agri_cost_outputs_disperse_below_inputs(full_agri_bank, full_agri_runs):
    in_corr = similarity.scenario_correlation(
        pipeline.scenario_feature_matrices(full_agri_bank))
    out_mats = {sid: run.cost_agri for sid, run in full_agri_runs.items()}
    out_corr = similarity.scenario_correlation(out_mats)
    assert min(out_corr.off_diagonal()) < min(in_corr.off_diagonal())


# --------------------------------------------------------------------------
# 7. Surrogate quality on the capFMs task
# --------------------------------------------------------------------------

def test_surrogate_quality_and_runtime(desk_table, desk_surrogate):
    trained, elapsed = desk_surrogate
    cfg = trained.ensemble.config
    assert cfg.n_folds == 10 and cfg.n_trees == 50
    assert trained.test_index.size == pytest.approx(
        0.2 * desk_table.y.size, rel=0.02)
    m = trained.metrics
    y_range = float(desk_table.y.max() - desk_table.y.min())
    assert m.r2 >= 0.90, f"held-out R2 {m.r2:.4f}"
    assert m.rmse <= 0.05 * y_range, f"RMSE {m.rmse:.3f} vs range {y_range:.3f}"
    assert elapsed < 120.0, f"training took {elapsed:.1f}s"


# --------------------------------------------------------------------------
# 8. SHAP axioms
# --------------------------------------------------------------------------

def test_shap_local_accuracy_1000_points():
    rng = np.random.default_rng(99)
    X = rng.normal(size=(300, 6))
    y = X @ np.array([3.0, -2.0, 1.0, 0.0, 0.5, -1.0]) + rng.normal(
        scale=0.1, size=300)
    e = surrogate.fit_ensemble(
        X, y, surrogate.EnsembleConfig(n_folds=2, n_trees=5, max_depth=8,
                                       seed=0))
    pts = rng.normal(size=(1000, 6))
    attr = attribution.ensemble_shap(e, pts, seed=0)
    recon = attr.phi0 + attr.phi.sum(axis=1)
    pred = e.predict(pts)
    assert np.max(np.abs(recon - pred)) <= 1e-8


def test_shap_oracle_equivalence_100_trees():
    rng = np.random.default_rng(100)
    for _ in range(100):
        p = int(rng.integers(2, 5))
        X = rng.normal(size=(40, p))
        yv = rng.normal(size=40)
        tree = surrogate.fit_tree(
            X, yv, surrogate.TreeParams(max_depth=int(rng.integers(1, 4)),
                                        feature_subsample=p,
                                        seed=int(rng.integers(1 << 30))))
        cover = attribution.covers(tree, X)
        x = rng.normal(size=p)
        phi = attribution.tree_shap(tree, x, X, cover)
        oracle = exhaustive_shapley(tree, cover, x, p)
        assert np.max(np.abs(phi - oracle)) <= 1e-8


def test_shap_missingness_exact_zero():
    rng = np.random.default_rng(101)
    X = rng.normal(size=(60, 5))
    y = 4.0 * X[:, 0] - 3.0 * X[:, 2]
    tree = surrogate.fit_tree(X, y, surrogate.TreeParams(max_depth=4,
                                                         feature_subsample=5))
    used = set(tree.feature[tree.feature >= 0].tolist())
    unused = sorted(set(range(5)) - used)
    assert unused
    for x in rng.normal(size=(25, 5)):
        phi = attribution.tree_shap(tree, x, X)
        for j in unused:
            assert phi[j] == 0.0


# --------------------------------------------------------------------------
# 9. Query pipeline
# --------------------------------------------------------------------------

def test_query_pipeline_end_to_end(fm_bank, agri_bank, fm_runs,
                                   desk_surrogate):
    pmap_fm = narrator.default_parameter_map("fm")
    q1 = narrator.parse_query(QUERY_CO2, pmap_fm)
    assert (q1.parameter, q1.multiplier) == ("CO2price", pytest.approx(1.2))
    m1 = narrator.match_scenarios(q1, fm_bank)
    assert {"S04", "S05", "S06"} <= set(m1.ids)

    pmap_agri = narrator.default_parameter_map("agri")
    q2 = narrator.parse_query(QUERY_INV, pmap_agri)
    assert (q2.parameter, q2.direction) == ("costInvAgri", "decrease")
    m2 = narrator.match_scenarios(q2, agri_bank)
    assert {"S10", "S11", "S12"} <= set(m2.ids)

    trained, _ = desk_surrogate
    art = pipeline.cluster_bank(fm_bank, fm_runs, space="input")
    metrics = trained.metrics
    attr = attribution.ensemble_shap(
        trained.ensemble, trained.table.X[trained.test_index],
        n_samples=4, seed=0)
    extras = {
        "metrics": {"r2": metrics.r2, "rmse": metrics.rmse},
        "top_features": [
            {**item, "avg_value": 0.0}
            for item in attribution.shap_prompt_payload(attr)["top_features"]
        ],
        "best_region": "DE2",
        "best_tech": "FM04_DouglasFir",
    }
    run_a = narrator.answer_query(QUERY_CO2, fm_bank, art.labels, art.corr,
                                  narrator.NarratorConfig(), extras=extras)
    run_b = narrator.answer_query(QUERY_CO2, fm_bank, art.labels, art.corr,
                                  narrator.NarratorConfig(), extras=extras)
    assert run_a["prompt"].encode() == run_b["prompt"].encode()
    assert run_a["narrative"].text.encode() == run_b["narrative"].text.encode()
    for header in ("**Stakeholder Query**:", "**Model Performance**:",
                   "**Top 3 Influential Features (from SHAP analysis across "
                   "ensemble models)**:", "**Regional & Policy Highlights**:",
                   "**Task**:"):
        assert header in run_a["prompt"]


# --------------------------------------------------------------------------
# 10. Determinism of the full artifact pipeline
# --------------------------------------------------------------------------

def _run_pipeline(root: Path) -> dict[str, str]:
    runner = CliRunner()

    def run(*args):
        result = runner.invoke(cli_main, list(args), catch_exceptions=False)
        assert result.exit_code == 0, result.output

    run("bank", "generate", "--bank", "fm", "--seed", "7", "--scale", "desk",
        "--out", str(root))
    run("bank", "run", "--in", str(root), "--workers", "4")
    run("features", "--in", str(root))
    run("cluster", "--in", str(root), "--space", "input", "--t", "0.5")
    run("train", "--in", str(root), "--target", "capFMs",
        "--folds", "3", "--trees", "8", "--max-depth", "8", "--seed", "42")
    run("shap", "--in", str(root), "--rows", "4", "--seed", "0")
    run("ask", QUERY_CO2, "--bank", "fm", "--seed", "7", "--stub",
        "--out", str(root))
    checksums = {}
    for path in sorted(root.rglob("*")):
        if path.is_file():
            checksums[str(path.relative_to(root))] = hashlib.sha256(
                path.read_bytes()).hexdigest()
    return checksums


def test_full_pipeline_checksum_determinism(tmp_path):
    a = _run_pipeline(tmp_path / "a")
    b = _run_pipeline(tmp_path / "b")
    assert a == b
    assert len(a) > 300  # inputs, outputs, features, clusters, model, ask
