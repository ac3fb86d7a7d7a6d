"""Exact per-tree Shapley attribution for the bagged surrogate.

Implements the path-dependent polynomial-time algorithm: for every root-leaf
path the weights of all feature coalitions are maintained incrementally
(EXTEND as the path grows, UNWIND to remove a feature), giving exact Shapley
values under the tree-conditioned expectation in O(leaves * depth^2).
Conditional expectations weight children by background cover counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .surrogate import ForestEnsemble, RegressionTree


def covers(tree: RegressionTree, background: np.ndarray) -> np.ndarray:
    """Background rows routed through every node (root gets all rows)."""
    X = np.atleast_2d(np.asarray(background, dtype=float))
    out = np.zeros(tree.n_nodes)
    rows_at = {0: np.arange(X.shape[0])}
    for node in range(tree.n_nodes):
        rows = rows_at.pop(node, None)
        if rows is None:
            rows = np.array([], dtype=int)
        out[node] = rows.size
        if tree.feature[node] >= 0:
            mask = X[rows, tree.feature[node]] <= tree.threshold[node]
            rows_at[int(tree.left[node])] = rows[mask]
            rows_at[int(tree.right[node])] = rows[mask == False]  # noqa: E712
    if out[0] == 0:
        raise ValueError("background set is empty")
    if np.any((tree.feature >= 0) & (out == 0)):
        raise ValueError("background does not reach every internal node")
    return out


def expected_value(tree: RegressionTree, cover: np.ndarray) -> float:
    """Cover-weighted mean over leaves: the attribution intercept phi0."""
    leaves = tree.feature < 0
    return float(tree.value[leaves] @ cover[leaves] / cover[0])


def _extend(path: list[list[float]], pz: float, po: float, pi: int) -> None:
    l = len(path)
    path.append([pi, pz, po, 1.0 if l == 0 else 0.0])
    for i in range(l - 1, -1, -1):
        path[i + 1][3] += po * path[i][3] * (i + 1) / (l + 1)
        path[i][3] = pz * path[i][3] * (l - i) / (l + 1)


def _unwind(path: list[list[float]], i: int) -> None:
    l = len(path) - 1
    one, zero = path[i][2], path[i][1]
    n = path[l][3]
    for j in range(l - 1, -1, -1):
        if one != 0.0:
            t = path[j][3]
            path[j][3] = n * (l + 1) / ((j + 1) * one)
            n = t - path[j][3] * zero * (l - j) / (l + 1)
        else:
            path[j][3] = path[j][3] * (l + 1) / (zero * (l - j))
    for j in range(i, l):
        path[j][0], path[j][1], path[j][2] = path[j + 1][0], path[j + 1][1], path[j + 1][2]
    path.pop()


def _unwound_sum(path: list[list[float]], i: int) -> float:
    l = len(path) - 1
    one, zero = path[i][2], path[i][1]
    total = 0.0
    if one != 0.0:
        n = path[l][3]
        for j in range(l - 1, -1, -1):
            tmp = n / ((j + 1) * one)
            total += tmp
            n = path[j][3] - tmp * zero * (l - j)
    else:
        for j in range(l - 1, -1, -1):
            total += path[j][3] / (zero * (l - j))
    return total * (l + 1)


def tree_shap(tree: RegressionTree, x: np.ndarray, background: np.ndarray,
              cover: np.ndarray | None = None) -> np.ndarray:
    """Exact Shapley values of a single tree at point x.

    The value function is the tree-conditional expectation: features in the
    coalition follow x down the tree, absent features average children by
    background cover.  Returns phi with one entry per feature; phi0 is
    available via :func:`expected_value`.
    """
    x = np.asarray(x, dtype=float).ravel()
    c = covers(tree, background) if cover is None else cover
    phi = np.zeros(x.size)

    def recurse(node: int, path: list[list[float]],
                pz: float, po: float, pi: int) -> None:
        path = [row[:] for row in path]
        _extend(path, pz, po, pi)
        f = int(tree.feature[node])
        if f < 0:
            for i in range(1, len(path)):
                if path[i][2] == path[i][1]:
                    continue  # zero net contribution; avoids 0/0 on dead branches
                w = _unwound_sum(path, i)
                phi[int(path[i][0])] += w * (path[i][2] - path[i][1]) * tree.value[node]
            return
        lo, hi = int(tree.left[node]), int(tree.right[node])
        hot, cold = (lo, hi) if x[f] <= tree.threshold[node] else (hi, lo)
        iz = io = 1.0
        for i in range(1, len(path)):
            if int(path[i][0]) == f:
                iz, io = path[i][1], path[i][2]
                _unwind(path, i)
                break
        recurse(hot, path, iz * c[hot] / c[node], io, f)
        recurse(cold, path, iz * c[cold] / c[node], 0.0, f)

    recurse(0, [], 1.0, 1.0, -1)
    return phi


def _shap_kernel(feature: np.ndarray, threshold: np.ndarray, left: np.ndarray,
                 right: np.ndarray, value: np.ndarray, cover: np.ndarray,
                 x: np.ndarray, phi: np.ndarray, max_depth: int) -> None:
    """Iterative form of :func:`tree_shap` on flat arrays (njit-compiled).

    Path segments live in one preallocated buffer: each depth-first frame
    copies its parent's segment forward, extends it, and children write only
    beyond their own offset, so segments never alias.
    """
    size = (max_depth + 2) * (max_depth + 3) // 2
    pd = np.empty(size, np.int64)
    pz = np.empty(size, np.float64)
    po = np.empty(size, np.float64)
    pw = np.empty(size, np.float64)

    cap = 2 * (max_depth + 2)
    st_node = np.empty(cap, np.int64)
    st_depth = np.empty(cap, np.int64)
    st_off = np.empty(cap, np.int64)
    st_poff = np.empty(cap, np.int64)
    st_pz = np.empty(cap, np.float64)
    st_po = np.empty(cap, np.float64)
    st_pi = np.empty(cap, np.int64)

    top = 0
    st_node[0], st_depth[0], st_off[0], st_poff[0] = 0, 0, 0, 0
    st_pz[0], st_po[0], st_pi[0] = 1.0, 1.0, -1

    while top >= 0:
        node = st_node[top]
        udepth = st_depth[top]
        off = st_off[top]
        poff = st_poff[top]
        fz, fo = st_pz[top], st_po[top]
        fi = st_pi[top]
        top -= 1

        for i in range(udepth):
            pd[off + i] = pd[poff + i]
            pz[off + i] = pz[poff + i]
            po[off + i] = po[poff + i]
            pw[off + i] = pw[poff + i]

        # EXTEND with (fz, fo, fi)
        pd[off + udepth] = fi
        pz[off + udepth] = fz
        po[off + udepth] = fo
        pw[off + udepth] = 1.0 if udepth == 0 else 0.0
        for i in range(udepth - 1, -1, -1):
            pw[off + i + 1] += fo * pw[off + i] * (i + 1) / (udepth + 1)
            pw[off + i] = fz * pw[off + i] * (udepth - i) / (udepth + 1)

        f = feature[node]
        if f < 0:
            for i in range(1, udepth + 1):
                one = po[off + i]
                zero = pz[off + i]
                if one == zero:
                    continue
                total = 0.0
                if one != 0.0:
                    nxt = pw[off + udepth]
                    for j in range(udepth - 1, -1, -1):
                        tmp = nxt / ((j + 1) * one)
                        total += tmp
                        nxt = pw[off + j] - tmp * zero * (udepth - j)
                else:
                    for j in range(udepth - 1, -1, -1):
                        total += pw[off + j] / (zero * (udepth - j))
                total *= udepth + 1
                phi[pd[off + i]] += total * (one - zero) * value[node]
            continue

        lo, hi = left[node], right[node]
        if x[f] <= threshold[node]:
            hot, cold = lo, hi
        else:
            hot, cold = hi, lo
        iz = 1.0
        io = 1.0
        depth_here = udepth
        for i in range(1, udepth + 1):
            if pd[off + i] == f:
                iz, io = pz[off + i], po[off + i]
                # UNWIND element i
                one, zero = io, iz
                nxt = pw[off + udepth]
                for j in range(udepth - 1, -1, -1):
                    if one != 0.0:
                        tmp = pw[off + j]
                        pw[off + j] = nxt * (udepth + 1) / ((j + 1) * one)
                        nxt = tmp - pw[off + j] * zero * (udepth - j) / (udepth + 1)
                    else:
                        pw[off + j] = pw[off + j] * (udepth + 1) / (zero * (udepth - j))
                for j in range(i, udepth):
                    pd[off + j] = pd[off + j + 1]
                    pz[off + j] = pz[off + j + 1]
                    po[off + j] = po[off + j + 1]
                depth_here = udepth - 1
                break

        child_depth = depth_here + 1
        child_off = off + child_depth + 1
        for child, czf, cof in ((cold, iz * cover[cold] / cover[node], 0.0),
                                (hot, iz * cover[hot] / cover[node], io)):
            top += 1
            st_node[top] = child
            st_depth[top] = child_depth
            st_off[top] = child_off
            st_poff[top] = off
            st_pz[top] = czf
            st_po[top] = cof
            st_pi[top] = f


try:  # pragma: no cover - exercised indirectly
    from numba import njit as _njit

    _shap_kernel_fast = _njit(cache=True)(_shap_kernel)
except ImportError:  # pragma: no cover
    _shap_kernel_fast = _shap_kernel


def tree_shap_fast(tree: RegressionTree, x: np.ndarray, background: np.ndarray,
                   cover: np.ndarray | None = None) -> np.ndarray:
    """Compiled equivalent of :func:`tree_shap` (bit-compatible arithmetic)."""
    x = np.asarray(x, dtype=float).ravel()
    c = covers(tree, background) if cover is None else cover
    phi = np.zeros(x.size)
    _shap_kernel_fast(tree.feature.astype(np.int64), tree.threshold,
                      tree.left.astype(np.int64), tree.right.astype(np.int64),
                      tree.value, c, x, phi, tree.max_depth())
    return phi


@dataclass(frozen=True)
class AttributionMatrix:
    """Per-sample, per-feature Shapley values in target units."""

    phi: np.ndarray           # (samples, features)
    phi0: np.ndarray          # (samples,)
    sample_index: np.ndarray  # rows of the evaluation matrix explained
    feature_names: tuple[str, ...]


def ensemble_shap(e: ForestEnsemble, X_eval: np.ndarray,
                  n_samples: int | None = None, seed: int = 0,
                  background: np.ndarray | None = None) -> AttributionMatrix:
    """Average per-tree Shapley values across every forest of the ensemble.

    A seeded subsample of X_eval rows is explained (all rows when
    ``n_samples`` is None).  Values are mapped back to target units through
    the ensemble's min-max record; the scaling offset lands in phi0 only,
    preserving additivity: prediction = phi0 + sum(phi).
    """
    X_eval = np.atleast_2d(np.asarray(X_eval, dtype=float))
    bg = background if background is not None else e.training_X
    if bg is None:
        raise ValueError("no background data: pass one explicitly")
    rng = np.random.default_rng(seed)
    if n_samples is not None and n_samples < X_eval.shape[0]:
        sample_index = np.sort(rng.choice(X_eval.shape[0], n_samples, replace=False))
    else:
        sample_index = np.arange(X_eval.shape[0])
    pts = X_eval[sample_index]
    n_feat = X_eval.shape[1]
    phi = np.zeros((pts.shape[0], n_feat))
    phi0 = 0.0
    for forest in e.folds:
        for tree in forest:
            cover = covers(tree, bg)
            weight = 1.0 / (len(e.folds) * len(forest))
            phi0 += expected_value(tree, cover) * weight
            for i, x in enumerate(pts):
                phi[i] += tree_shap_fast(tree, x, bg, cover) * weight
    scale = e.y_max - e.y_min
    names = tuple(e.feature_names) if e.feature_names \
        else tuple(f"x{j}" for j in range(n_feat))
    return AttributionMatrix(phi * scale,
                             np.full(pts.shape[0], e.y_min + phi0 * scale),
                             sample_index, names)


def global_importance(attr: AttributionMatrix) -> list[tuple[str, float]]:
    """Features ranked by mean absolute Shapley value, descending."""
    scores = np.abs(attr.phi).mean(axis=0)
    order = sorted(range(scores.size), key=lambda j: (-scores[j], attr.feature_names[j]))
    return [(attr.feature_names[j], float(scores[j])) for j in order]


def shap_prompt_payload(attr: AttributionMatrix, top_k: int = 3) -> dict:
    """Compact summary of the attribution for report generation."""
    ranked = global_importance(attr)
    return {
        "top_features": [
            {"name": name, "mean_abs_shap": score} for name, score in ranked[:top_k]
        ],
        "intercept": float(attr.phi0[0]) if attr.phi0.size else 0.0,
        "n_samples": int(attr.phi.shape[0]),
    }
