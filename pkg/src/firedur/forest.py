"""Bagged random-forest regressor with impurity importances."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .cart import Internal, TreeParams, VARIANCE, fit_tree, predict_tree_batch
from .errors import EmptyDataset, WidthMismatch

# Search grid used for tuning; "None" for max_features means all features.
GRID = {
    "n_estimators": [200, 350, 500, 700],
    "max_depth": [10, 20, 40, None],
    "min_samples_split": [2, 5, 10],
    "min_samples_leaf": [1, 2, 4],
    "max_features": ["sqrt", "log2", None],
}


@dataclass(frozen=True)
class ForestParams:
    """Defaults are the tuned values; GRID holds the full search space."""

    n_estimators: int = 350
    max_depth: Optional[int] = 10
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: Union[str, float, None] = "sqrt"
    bootstrap: bool = True
    seed: int = 0


@dataclass
class ForestModel:
    trees: list
    params: ForestParams
    tree_seeds: list
    importances: np.ndarray
    n_features: int


def _tree_task(X, y, params: ForestParams, tree_index: int):
    seq = np.random.SeedSequence(entropy=params.seed, spawn_key=(tree_index,))
    rng = np.random.default_rng(seq)
    n = X.shape[0]
    if params.bootstrap:
        sample = rng.integers(0, n, size=n)
        Xs, ys = X[sample], y[sample]
    else:
        Xs, ys = X, y
    tree_params = TreeParams(
        max_depth=params.max_depth,
        min_samples_split=params.min_samples_split,
        min_samples_leaf=params.min_samples_leaf,
        feature_subsample="all" if params.max_features is None else params.max_features,
    )
    tree = fit_tree(Xs, ys, tree_params, VARIANCE, rng=rng)
    return tree, int(seq.generate_state(1)[0])


def fit_forest(X, y, params: ForestParams = ForestParams(), threads: int = 1) -> ForestModel:
    """Fit n_estimators trees on bootstrap resamples.

    Each tree's random stream is derived from (seed, tree index), so the
    result is identical at any thread count and invariant to training
    order.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] == 0:
        raise EmptyDataset("fit_forest needs training rows")
    indices = range(params.n_estimators)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda t: _tree_task(X, y, params, t), indices))
    else:
        results = [_tree_task(X, y, params, t) for t in indices]
    trees = [tree for tree, _ in results]
    seeds = [seed for _, seed in results]
    model = ForestModel(trees=trees, params=params, tree_seeds=seeds,
                        importances=np.zeros(X.shape[1]), n_features=X.shape[1])
    model.importances = impurity_importance(model)
    return model


def predict_forest(model: ForestModel, X) -> np.ndarray:
    """Arithmetic mean of per-tree predictions (log-days space)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise WidthMismatch(model.n_features, X.shape[1] if X.ndim == 2 else 0)
    total = np.zeros(X.shape[0])
    for tree in model.trees:
        total += predict_tree_batch(tree, X)
    return total / len(model.trees)


def _tree_importance(tree, out: np.ndarray, n_root: int):
    if isinstance(tree, Internal):
        out[tree.feature_index] += (tree.n_samples / n_root) * tree.gain
        _tree_importance(tree.left, out, n_root)
        _tree_importance(tree.right, out, n_root)


def impurity_importance(model: ForestModel) -> np.ndarray:
    """Sample-weighted variance-gain totals, averaged over trees and
    normalized to sum 1 (all zeros when no tree ever split)."""
    total = np.zeros(model.n_features)
    for tree in model.trees:
        per_tree = np.zeros(model.n_features)
        _tree_importance(tree, per_tree, tree.n_samples)
        total += per_tree
    total /= len(model.trees)
    mass = total.sum()
    if mass > 0:
        total = total / mass
    return total
