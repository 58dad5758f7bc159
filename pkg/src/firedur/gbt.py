"""Second-order (Newton) gradient-boosted trees with shrinkage, row/column
subsampling, a split penalty and optional early stopping.

Squared-error objective on the log target: gradient g_i = yhat_i - y_i,
hessian h_i = 1. Each round fits a Newton-criterion tree to the current
residual state and adds learning_rate * leaf_weight to the running
predictions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cart import Internal, Newton, TreeParams, fit_tree, predict_tree_batch, remap_features
from .errors import EmptyDataset, MissingValidation, WidthMismatch

GRID = {
    "n_estimators": [300, 500, 700],
    "learning_rate": [0.01, 0.05, 0.1],
    "max_depth": [4, 6, 10],
    "subsample": [0.6, 0.8, 1.0],
    "colsample_bytree": [0.6, 0.8, 1.0],
    "gamma": [0, 0.2, 0.4],
}

# Patience applied when early stopping is enabled without an explicit value.
DEFAULT_PATIENCE = 50


@dataclass(frozen=True)
class GbtParams:
    """Defaults are the tuned values; lam stays fixed outside the grid."""

    n_estimators: int = 500
    learning_rate: float = 0.01
    max_depth: int = 4
    subsample: float = 0.6
    colsample_bytree: float = 0.8
    gamma: float = 0.4
    lam: float = 1.0
    early_stopping_rounds: Optional[int] = None
    seed: int = 0


@dataclass
class GbtModel:
    base_score: float
    trees: list                 # feature indices in full-matrix space
    column_masks: list          # per-round sorted column indices
    params: GbtParams
    importances: np.ndarray
    n_features: int
    best_iteration: Optional[int]
    val_rmse_curve: list


def _subset_size(fraction: float, n: int) -> int:
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"sampling fraction out of range: {fraction}")
    return max(1, int(fraction * n + 1e-9))


def fit_gbt(X, y, params: GbtParams = GbtParams(), X_val=None, y_val=None) -> GbtModel:
    """Boost for up to n_estimators rounds.

    Row subsets are drawn without replacement, column subsets once per tree;
    when a fraction is exactly 1 no randomness is consumed. With early
    stopping the model keeps the prefix of rounds up to the best validation
    RMSE.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] == 0:
        raise EmptyDataset("fit_gbt needs training rows")
    if params.early_stopping_rounds is not None and X_val is None:
        raise MissingValidation()
    n, d = X.shape
    rng = np.random.default_rng(np.random.SeedSequence(params.seed))
    base = float(y.mean())
    pred = np.full(n, base)
    if X_val is not None:
        X_val = np.asarray(X_val, dtype=float)
        y_val = np.asarray(y_val, dtype=float)
        val_pred = np.full(X_val.shape[0], base)

    tree_params = TreeParams(max_depth=params.max_depth, feature_subsample="all")
    criterion = Newton(lam=params.lam, gamma=params.gamma)
    trees, masks, curve = [], [], []
    best_round, best_rmse, stale = -1, np.inf, 0

    for _ in range(params.n_estimators):
        if params.subsample < 1.0:
            rows = np.sort(rng.choice(n, size=_subset_size(params.subsample, n), replace=False))
        else:
            rows = np.arange(n)
        if params.colsample_bytree < 1.0:
            cols = np.sort(rng.choice(d, size=_subset_size(params.colsample_bytree, d), replace=False))
        else:
            cols = np.arange(d)
        grad = pred[rows] - y[rows]
        hess = np.ones(rows.shape[0])
        tree = fit_tree(X[np.ix_(rows, cols)], grad, tree_params, criterion, hess=hess)
        tree = remap_features(tree, cols)
        trees.append(tree)
        masks.append([int(c) for c in cols])
        pred += params.learning_rate * predict_tree_batch(tree, X)
        if X_val is not None:
            val_pred += params.learning_rate * predict_tree_batch(tree, X_val)
            rmse = float(np.sqrt(np.mean((val_pred - y_val) ** 2)))
            curve.append(rmse)
            if rmse < best_rmse:
                best_rmse, best_round, stale = rmse, len(trees) - 1, 0
            else:
                stale += 1
                if (params.early_stopping_rounds is not None
                        and stale >= params.early_stopping_rounds):
                    break

    best_iteration = None
    if params.early_stopping_rounds is not None:
        best_iteration = best_round
        trees = trees[:best_round + 1]
        masks = masks[:best_round + 1]

    model = GbtModel(base_score=base, trees=trees, column_masks=masks,
                     params=params, importances=np.zeros(d), n_features=d,
                     best_iteration=best_iteration, val_rmse_curve=curve)
    model.importances = gain_importance(model)
    return model


def predict_gbt(model: GbtModel, X) -> np.ndarray:
    """base_score + learning_rate-scaled sum over kept trees (log-days)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise WidthMismatch(model.n_features, X.shape[1] if X.ndim == 2 else 0)
    out = np.full(X.shape[0], model.base_score)
    for tree in model.trees:
        out += model.params.learning_rate * predict_tree_batch(tree, X)
    return out


def _accumulate_gain(tree, out: np.ndarray):
    if isinstance(tree, Internal):
        out[tree.feature_index] += tree.gain
        _accumulate_gain(tree.left, out)
        _accumulate_gain(tree.right, out)


def gain_importance(model: GbtModel) -> np.ndarray:
    """Total Newton gain per split feature over kept trees, normalized to
    sum 1 (zeros when there are no trees or no splits)."""
    total = np.zeros(model.n_features)
    for tree in model.trees:
        _accumulate_gain(tree, total)
    mass = total.sum()
    if mass > 0:
        total = total / mass
    return total
