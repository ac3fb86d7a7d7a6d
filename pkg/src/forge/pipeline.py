"""End-to-end orchestration: bank run -> features -> clusters -> surrogate.

These helpers glue the module-level operations into the artifact flow used
by the CLI and the HTTP service.  Everything is deterministic given the
bank seed and the configuration seeds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bank as bankmod
from . import features, similarity, surrogate
from .model import SetsSpec


@dataclass(frozen=True)
class LearningTable:
    """Stacked per-scenario design matrix with aligned targets."""

    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    row_keys: list[tuple[str, str, str, int]]  # (scenario, region, tech, year)


def scenario_feature_matrices(b: bankmod.ScenarioBank) -> dict[str, features.FeatureMatrix]:
    """Raw (unnormalized) feature matrix for every scenario of the bank."""
    return {
        r.scenario_id: features.assemble(bankmod.materialize(b.baseline, r), b.bank)
        for r in b.recipes
    }


def build_learning_table(b: bankmod.ScenarioBank,
                         runs: dict[str, bankmod.ScenarioRun],
                         target: str = "capFMs") -> LearningTable:
    """Assemble the supervised task: scenario features x years -> output cell.

    Min-max scaling is fitted jointly on the stacked scenario matrices so
    that scenario-to-scenario level differences survive normalization.
    """
    sets = b.baseline.sets
    mats = scenario_feature_matrices(b)
    stack = np.vstack([mats[r.scenario_id].values for r in b.recipes])
    lo, hi = stack.min(axis=0), stack.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    varies = hi - lo > 0

    techs = sets.fm_techs if b.bank == "fm" else sets.agri_techs
    blocks, targets, keys = [], [], []
    names: list[str] = []
    for recipe in b.recipes:
        m = mats[recipe.scenario_id]
        norm = features.FeatureMatrix(
            m.rows, m.columns, np.where(varies, (m.values - lo) / span, 0.0))
        X, names = features.encode_for_learning(norm, sets, techs)
        run = runs[recipe.scenario_id]
        out = _target_tensor(run, target)
        y = np.empty(X.shape[0])
        for i, (region, tech) in enumerate(m.rows):
            ri, ki = sets.regions.index(region), techs.index(tech)
            y[i * sets.n_years:(i + 1) * sets.n_years] = out[:, ki, ri]
            keys += [(recipe.scenario_id, region, tech, yr) for yr in sets.years]
        blocks.append(X)
        targets.append(y)
    return LearningTable(np.vstack(blocks), np.concatenate(targets), names, keys)


def _target_tensor(run: bankmod.ScenarioRun, target: str) -> np.ndarray:
    tensors = {
        "capFMs": run.solution.cap_fms,
        "capAgri": run.solution.cap_agri,
        "ghgAbateFMs": run.abatement.ghg_abate_fms,
        "ghgAbateAgri": run.abatement.ghg_abate_agri,
        "costTechFMs": run.cost_fms,
        "costTechAgri": run.cost_agri,
    }
    if target not in tensors:
        raise KeyError(f"unknown target {target!r}; one of {sorted(tensors)}")
    return tensors[target]


@dataclass(frozen=True)
class ClusterArtifacts:
    corr: similarity.CorrelationMatrix
    linkage: np.ndarray
    labels: np.ndarray
    threshold: float


def cluster_bank(b: bankmod.ScenarioBank,
                 runs: dict[str, bankmod.ScenarioRun] | None = None,
                 space: str = "input", output_tensor: str = "costTechAgri",
                 t: float = 0.5) -> ClusterArtifacts:
    """Correlate and cluster the bank in input or output space."""
    if space == "input":
        mats = scenario_feature_matrices(b)
    elif space == "output":
        if runs is None:
            raise ValueError("output-space clustering needs solved runs")
        mats = {sid: _target_tensor(run, output_tensor) for sid, run in runs.items()}
    else:
        raise ValueError(f"unknown space {space!r}")
    corr = similarity.scenario_correlation(mats)
    linkage = similarity.average_linkage(similarity.to_dissimilarity(corr))
    labels = similarity.flat_clusters(linkage, t, len(corr.ids))
    return ClusterArtifacts(corr, linkage, labels, t)


@dataclass(frozen=True)
class TrainedSurrogate:
    ensemble: surrogate.ForestEnsemble
    metrics: surrogate.RegressionMetrics
    table: LearningTable
    test_index: np.ndarray


def train_surrogate(table: LearningTable,
                    config: surrogate.EnsembleConfig = surrogate.EnsembleConfig(),
                    test_fraction: float = 0.2, split_seed: int = 0
                    ) -> TrainedSurrogate:
    """Fit the ensemble on a seeded 80/20 split and report held-out metrics."""
    n = table.y.size
    rng = np.random.default_rng(split_seed)
    order = rng.permutation(n)
    cut = int(round(n * (1 - test_fraction)))
    train_idx, test_idx = order[:cut], order[cut:]
    ens = surrogate.fit_ensemble(table.X[train_idx], table.y[train_idx], config,
                                 feature_names=table.feature_names)
    metrics = surrogate.evaluate(table.y[test_idx], ens.predict(table.X[test_idx]))
    return TrainedSurrogate(ens, metrics, table, test_idx)


def default_sets(scale: str) -> SetsSpec:
    if scale == "full":
        return SetsSpec.full_size()
    if scale == "desk":
        return SetsSpec.desk_scale()
    raise ValueError(f"unknown scale {scale!r}")
