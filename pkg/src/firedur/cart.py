"""Binary regression trees: greedy axis-aligned splitting with pluggable
criteria.

Two criteria back the two ensembles. VARIANCE maximizes the mean-squared
error reduction

    gain = var(parent) - (n_L * var(L) + n_R * var(R)) / n

with leaves predicting the target mean. NEWTON scores a split on per-row
gradient/hessian sums

    gain = 1/2 * (G_L^2/(H_L+lam) + G_R^2/(H_R+lam) - G^2/(H+lam)) - gamma

with leaves predicting -G/(H+lam).

Candidate thresholds are the midpoints between consecutive distinct sorted
values of a feature. Ties break toward the lowest feature index, then the
lowest threshold. Rows route left when value <= threshold, at fit and
predict time alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import EmptyDataset, WidthMismatch


@dataclass(frozen=True)
class Leaf:
    value: float
    n_samples: int


@dataclass(frozen=True)
class Internal:
    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"
    gain: float
    n_samples: int


TreeNode = Union[Leaf, Internal]


@dataclass(frozen=True)
class Variance:
    pass


@dataclass(frozen=True)
class Newton:
    lam: float = 1.0
    gamma: float = 0.0


VARIANCE = Variance()


@dataclass(frozen=True)
class TreeParams:
    max_depth: Optional[int] = None     # None = unlimited
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    feature_subsample: Union[str, float] = "all"  # "sqrt" | "log2" | "all" | fraction


def newton_leaf_weight(g_sum: float, h_sum: float, lam: float) -> float:
    return -g_sum / (h_sum + lam)


def newton_gain(gl, hl, gr, hr, lam, gamma) -> float:
    total = (gl + gr) ** 2 / (hl + hr + lam)
    return 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - total) - gamma


def _subsample_size(d: int, mode) -> int:
    if mode == "sqrt":
        return max(1, int(math.sqrt(d)))
    if mode == "log2":
        return max(1, int(math.log2(d)))
    if isinstance(mode, float):
        if not 0.0 < mode <= 1.0:
            raise ValueError(f"feature fraction out of range: {mode}")
        return max(1, int(mode * d + 1e-9))
    raise ValueError(f"unknown feature_subsample mode: {mode!r}")


def _candidate_features(d: int, mode, rng) -> np.ndarray:
    if mode == "all" or mode is None:
        return np.arange(d)
    if rng is None:
        raise ValueError("feature subsampling needs an rng stream")
    m = _subsample_size(d, mode)
    chosen = rng.permutation(d)[:m]
    chosen.sort()  # ascending order keeps the feature-index tie-break stable
    return chosen


def _scan_columns(sub, y, hess, criterion, min_leaf):
    """Vectorized split search over the columns of a node submatrix.

    `sub` is (n, m): the node's rows restricted to candidate features.
    Returns (column_index, threshold, gain, left_mask) or None. Gains for
    all cut positions of all columns are computed at once; the flat argmax
    runs column-major so ties resolve to the lowest feature index, then the
    lowest threshold.
    """
    n, m = sub.shape
    order = np.argsort(sub, axis=0, kind="stable")
    xs = sub[order, np.arange(m)]
    left_n = np.arange(1, n, dtype=float)[:, None]
    right_n = n - left_n
    valid = xs[1:] != xs[:-1]
    valid &= left_n >= min_leaf
    valid &= right_n >= min_leaf
    if not valid.any():
        return None
    if isinstance(criterion, Newton):
        gcum = np.cumsum(y[order], axis=0)
        hcum = np.cumsum(hess[order], axis=0)
        g_total, h_total = gcum[-1], hcum[-1]
        gl, hl = gcum[:-1], hcum[:-1]
        gr, hr = g_total - gl, h_total - hl
        gains = 0.5 * (gl * gl / (hl + criterion.lam) + gr * gr / (hr + criterion.lam)
                       - g_total * g_total / (h_total + criterion.lam)) - criterion.gamma
    else:
        ys = y[order]
        csum = np.cumsum(ys, axis=0)
        csum2 = np.cumsum(ys * ys, axis=0)
        total, total2 = csum[-1], csum2[-1]
        sum_l, sum2_l = csum[:-1], csum2[:-1]
        # n_c * var(c) = sum(y^2) - sum(y)^2 / n_c, per child
        ssd_l = sum2_l - sum_l * sum_l / left_n
        ssd_r = (total2 - sum2_l) - (total - sum_l) ** 2 / right_n
        parent_ssd = total2 - total * total / n
        gains = (parent_ssd - ssd_l - ssd_r) / n
    gains[~valid] = -np.inf
    flat = gains.T.ravel()
    best = int(np.argmax(flat))
    gain = flat[best]
    if not gain > 0.0:
        return None
    column, position = divmod(best, n - 1)
    threshold = float(0.5 * (xs[position, column] + xs[position + 1, column]))
    return column, threshold, float(gain), sub[:, column] <= threshold


def best_split(X, y, feature_subset, criterion=VARIANCE, min_samples_leaf=1, hess=None):
    """Best (feature, threshold, gain) over the given rows, or None.

    Scans the midpoints between consecutive distinct sorted values of each
    candidate feature; ties break to the lowest feature index, then the
    lowest threshold. For the Newton criterion `y` carries per-row
    gradients and `hess` the per-row hessians.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] < 2:
        return None
    features = np.asarray(list(feature_subset), dtype=int)
    if isinstance(criterion, Newton):
        hess = np.asarray(hess, dtype=float)
    found = _scan_columns(X[:, features], y, hess, criterion, min_samples_leaf)
    if found is None:
        return None
    column, threshold, gain, _ = found
    return int(features[column]), threshold, gain


def _leaf_value(y, hess, criterion) -> float:
    if isinstance(criterion, Newton):
        return newton_leaf_weight(float(y.sum()), float(hess.sum()), criterion.lam)
    return float(y.mean())


def fit_tree(X, y, params: TreeParams = TreeParams(), criterion=VARIANCE,
             hess=None, rng=None) -> TreeNode:
    """Grow a tree greedily. Recursion stops on the depth cap,
    min_samples_split, or when no split has positive gain.

    For the Newton criterion `y` is the gradient vector and `hess` the
    hessian vector. Feature subsampling redraws the candidate set at every
    node from `rng`; mode "all" consumes no randomness.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyDataset("fit_tree needs a non-empty 2-D matrix")
    if isinstance(criterion, Newton):
        if hess is None:
            raise ValueError("Newton criterion requires a hessian vector")
        hess = np.asarray(hess, dtype=float)
    d = X.shape[1]

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        node_y = y[idx]
        node_h = hess[idx] if hess is not None else None
        n = idx.shape[0]

        def leaf():
            return Leaf(value=_leaf_value(node_y, node_h, criterion), n_samples=n)

        if params.max_depth is not None and depth >= params.max_depth:
            return leaf()
        if n < params.min_samples_split:
            return leaf()
        features = _candidate_features(d, params.feature_subsample, rng)
        found = _scan_columns(X[np.ix_(idx, features)], node_y, node_h,
                              criterion, params.min_samples_leaf)
        if found is None:
            return leaf()
        column, threshold, gain, mask = found
        left_idx, right_idx = idx[mask], idx[~mask]
        if left_idx.size == 0 or right_idx.size == 0:
            return leaf()
        return Internal(
            feature_index=int(features[column]),
            threshold=threshold,
            left=grow(left_idx, depth + 1),
            right=grow(right_idx, depth + 1),
            gain=gain,
            n_samples=n,
        )

    return grow(np.arange(X.shape[0]), 0)


def predict_tree(tree: TreeNode, row) -> float:
    """Root-to-leaf descent; values equal to a threshold go left."""
    node = tree
    width = len(row)
    while isinstance(node, Internal):
        if node.feature_index >= width:
            raise WidthMismatch(node.feature_index + 1, width)
        node = node.left if row[node.feature_index] <= node.threshold else node.right
    return node.value


def predict_tree_batch(tree: TreeNode, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    out = np.empty(X.shape[0], dtype=float)

    def walk(node, idx):
        if isinstance(node, Leaf):
            out[idx] = node.value
            return
        if node.feature_index >= X.shape[1]:
            raise WidthMismatch(node.feature_index + 1, X.shape[1])
        mask = X[idx, node.feature_index] <= node.threshold
        walk(node.left, idx[mask])
        walk(node.right, idx[~mask])

    walk(tree, np.arange(X.shape[0]))
    return out


def tree_depth(tree: TreeNode) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(tree_depth(tree.left), tree_depth(tree.right))


def remap_features(tree: TreeNode, columns) -> TreeNode:
    """Rewrite subspace feature indices back to full-matrix indices."""
    if isinstance(tree, Leaf):
        return tree
    return Internal(
        feature_index=int(columns[tree.feature_index]),
        threshold=tree.threshold,
        left=remap_features(tree.left, columns),
        right=remap_features(tree.right, columns),
        gain=tree.gain,
        n_samples=tree.n_samples,
    )


def tree_to_dict(tree: TreeNode) -> dict:
    if isinstance(tree, Leaf):
        return {"value": tree.value, "n": tree.n_samples}
    return {
        "feature": tree.feature_index,
        "threshold": tree.threshold,
        "gain": tree.gain,
        "n": tree.n_samples,
        "left": tree_to_dict(tree.left),
        "right": tree_to_dict(tree.right),
    }


def tree_from_dict(payload: dict) -> TreeNode:
    if "value" in payload:
        return Leaf(value=payload["value"], n_samples=payload["n"])
    return Internal(
        feature_index=payload["feature"],
        threshold=payload["threshold"],
        left=tree_from_dict(payload["left"]),
        right=tree_from_dict(payload["right"]),
        gain=payload["gain"],
        n_samples=payload["n"],
    )
