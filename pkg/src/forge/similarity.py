"""Scenario similarity: Pearson correlation and average-linkage clustering.

Scenario matrices are flattened to vectors, z-scored per feature, and
compared pairwise.  Clustering is plain UPGMA written against the condensed
dissimilarity 1 - rho, with a fixed arithmetic order (sorted member pairs)
and a deterministic tie-break so results are reproducible bit for bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


class ConstantVectorError(ValueError):
    """Pearson correlation is undefined when either vector is constant."""


def zscore(matrix: np.ndarray) -> np.ndarray:
    """Standardize each column to zero mean / unit sample std; constant -> 0."""
    m = np.asarray(matrix, dtype=float)
    mu = m.mean(axis=0)
    sd = m.std(axis=0, ddof=1) if m.shape[0] > 1 else np.zeros(m.shape[1])
    out = np.zeros_like(m)
    # constancy is judged on the raw spread: identical entries must map to
    # exactly 0 even when the accumulated mean carries rounding residue
    ok = (m.max(axis=0) - m.min(axis=0) > 0) & (sd > 0)
    out[:, ok] = (m[:, ok] - mu[ok]) / sd[ok]
    return out


def pearson(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise ValueError("vectors must have the same length")
    du, dv = u - u.mean(), v - v.mean()
    su, sv = float(du @ du), float(dv @ dv)
    if su == 0.0 or sv == 0.0:
        raise ConstantVectorError("correlation undefined for a constant vector")
    return float(np.clip(du @ dv / np.sqrt(su * sv), -1.0, 1.0))


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric scenario-by-scenario Pearson matrix; NaN marks excluded pairs."""

    ids: tuple[str, ...]
    rho: np.ndarray

    def __post_init__(self):
        n = len(self.ids)
        if self.rho.shape != (n, n):
            raise ValueError("rho shape does not match ids")
        finite = self.rho[np.isfinite(self.rho)]
        if finite.size and (finite.min() < -1 - 1e-12 or finite.max() > 1 + 1e-12):
            raise ValueError("correlation entries outside [-1, 1]")

    def off_diagonal(self) -> np.ndarray:
        n = len(self.ids)
        iu = np.triu_indices(n, 1)
        return self.rho[iu]


def as_matrix(obj) -> np.ndarray:
    """Coerce a scenario artifact to a 2-D (row, feature) matrix.

    Feature matrices pass through as their numeric values.  Output tensors
    shaped (year, technology, region) become one row per (region,
    technology) pair — matching the feature-row order — with years as the
    feature columns.
    """
    values = getattr(obj, "values", obj)
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 3:
        return arr.transpose(2, 1, 0).reshape(-1, arr.shape[0])
    if arr.ndim != 2:
        raise ValueError(f"expected a matrix or 3-D tensor, got ndim={arr.ndim}")
    return arr


def scenario_correlation(matrices: dict) -> CorrelationMatrix:
    """Pairwise Pearson matrix over named scenario matrices.

    Each matrix is z-scored per feature (column) independently, vectorized
    row-major, and compared pairwise.  A pair involving an all-constant
    matrix is excluded (entry NaN) with a warning rather than coerced.
    """
    ids = tuple(matrices.keys())
    shapes = {ids[0]: as_matrix(matrices[ids[0]]).shape}
    vecs = []
    for sid in ids:
        m = as_matrix(matrices[sid])
        if m.shape != shapes[ids[0]]:
            raise ValueError(
                f"shape mismatch: {sid} has {m.shape}, {ids[0]} has {shapes[ids[0]]}")
        vecs.append(zscore(m).ravel())
    n = len(ids)
    rho = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            try:
                rho[i, j] = rho[j, i] = pearson(vecs[i], vecs[j])
            except ConstantVectorError:
                warnings.warn(
                    f"excluding pair ({ids[i]}, {ids[j]}): constant vector",
                    RuntimeWarning, stacklevel=2)
                rho[i, j] = rho[j, i] = np.nan
    return CorrelationMatrix(ids, rho)


def to_dissimilarity(corr: CorrelationMatrix) -> np.ndarray:
    """Condensed upper-triangle (row-major) distances 1 - rho, clipped to [0, 2]."""
    d = np.clip(1.0 - corr.off_diagonal(), 0.0, 2.0)
    if not np.all(np.isfinite(d)):
        raise ValueError("cannot cluster with excluded (NaN) pairs present")
    return d


def _square(condensed: np.ndarray, n: int) -> np.ndarray:
    full = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    full[iu] = condensed
    return full + full.T


def average_linkage(condensed: np.ndarray) -> np.ndarray:
    """UPGMA agglomeration over a condensed distance vector.

    Returns an (n-1, 4) linkage array: merged cluster ids, merge height,
    member count; new clusters take ids n, n+1, ...  Inter-cluster distance
    is the arithmetic mean of original pairwise distances, accumulated over
    member pairs in sorted order so the floating-point result is exact for
    equality testing.  Ties break toward the smallest (min id, max id) pair.
    """
    condensed = np.asarray(condensed, dtype=float)
    m = condensed.size
    n = int(round((1 + np.sqrt(1 + 8 * m)) / 2))
    if n * (n - 1) // 2 != m:
        raise ValueError("condensed vector length is not n(n-1)/2")
    d0 = _square(condensed, n)
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    merges = np.zeros((n - 1, 4))
    for step in range(n - 1):
        best = None
        active = sorted(members)
        for ai, a in enumerate(active):
            for b in active[ai + 1:]:
                total = 0.0
                for u in members[a]:
                    for v in members[b]:
                        total += d0[u, v]
                dist = total / (len(members[a]) * len(members[b]))
                key = (dist, a, b)
                if best is None or key < best:
                    best = key
        assert best is not None
        dist, a, b = best
        new_id = n + step
        members[new_id] = sorted(members.pop(a) + members.pop(b))
        merges[step] = (a, b, dist, len(members[new_id]))
    return merges


def flat_clusters(merges: np.ndarray, t: float, n: int) -> np.ndarray:
    """Cut the linkage at height t; labels are dense positive ints from 1.

    Leaves joined by merges with height <= t share a label.  Labels are
    assigned in leaf order (first leaf of each cluster encountered first).
    """
    parent = list(range(n + len(merges)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for step, (a, b, height, _) in enumerate(merges):
        if height <= t:
            new_id = n + step
            parent[find(int(a))] = new_id
            parent[find(int(b))] = new_id
    labels = np.zeros(n, dtype=int)
    seen: dict[int, int] = {}
    for leaf in range(n):
        root = find(leaf)
        if root not in seen:
            seen[root] = len(seen) + 1
        labels[leaf] = seen[root]
    return labels


def extremal_pairs(corr: CorrelationMatrix, k: int = 1
                   ) -> tuple[list[tuple[str, str, float]], list[tuple[str, str, float]]]:
    """The k most and least correlated scenario pairs (NaN pairs skipped)."""
    n = len(corr.ids)
    pairs = [
        (corr.ids[i], corr.ids[j], float(corr.rho[i, j]))
        for i in range(n) for j in range(i + 1, n)
        if np.isfinite(corr.rho[i, j])
    ]
    by_rho = sorted(pairs, key=lambda p: (p[2], p[0], p[1]))
    return list(reversed(by_rho[-k:])), by_rho[:k]


def intra_cluster_mean(corr: CorrelationMatrix, labels: np.ndarray, label: int) -> float:
    """Mean correlation over all ordered pairs of a cluster, diagonal included."""
    idx = np.flatnonzero(np.asarray(labels) == label)
    if idx.size == 0:
        raise ValueError(f"no members with label {label}")
    block = corr.rho[np.ix_(idx, idx)]
    return float(block.mean())
