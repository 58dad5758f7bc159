"""Day-unit metrics, 5-fold cross-validated grid search and residual bins.

Models are fit and scored on the log target during cross-validation (the
scale they optimize); reported metrics are always in days after the inverse
transform.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import forest, gbt
from .errors import LengthMismatch, TooFewRows

RESIDUAL_BIN_EDGES = (0.0, 10.0, 40.0, float("inf"))


@dataclass(frozen=True)
class MetricSet:
    mae_days: float
    rmse_days: float
    r2_days: float  # NaN when the truth is constant


def inverse_transform(pred_log):
    """Back to days: exp(x) - 1, clamped at zero (durations cannot be
    negative)."""
    return np.maximum(np.expm1(np.asarray(pred_log, dtype=float)), 0.0)


def compute_metrics(true_days, pred_days) -> MetricSet:
    true_days = np.asarray(true_days, dtype=float)
    pred_days = np.asarray(pred_days, dtype=float)
    if true_days.shape != pred_days.shape or true_days.ndim != 1:
        raise LengthMismatch(true_days.shape, pred_days.shape)
    if true_days.size < 2:
        raise LengthMismatch(true_days.size, pred_days.size)
    err = pred_days - true_days
    mae = float(np.mean(np.abs(err)))
    rmse = float(np.sqrt(np.mean(err ** 2)))
    ss_tot = float(np.sum((true_days - true_days.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = float("nan")
    else:
        r2 = 1.0 - float(np.sum(err ** 2)) / ss_tot
    return MetricSet(mae_days=mae, rmse_days=rmse, r2_days=r2)


@dataclass(frozen=True)
class CvPlan:
    folds: tuple  # disjoint index arrays covering all rows, sizes differ <= 1
    k: int
    seed: int


def kfold_indices(n_rows: int, k: int = 5, seed: int = 0) -> CvPlan:
    """Seeded shuffle, then contiguous chunks (larger folds first)."""
    if n_rows < k:
        raise TooFewRows(n_rows, k)
    order = np.random.default_rng(np.random.SeedSequence(seed)).permutation(n_rows)
    base, extra = divmod(n_rows, k)
    folds, start = [], 0
    for fold in range(k):
        size = base + (1 if fold < extra else 0)
        folds.append(np.sort(order[start:start + size]))
        start += size
    return CvPlan(folds=tuple(folds), k=k, seed=seed)


def _fit_predict(model_kind: str, params_dict: dict, seed: int,
                 X_train, y_train, X_test):
    if model_kind == "rf":
        params = replace(forest.ForestParams(**params_dict), seed=seed)
        model = forest.fit_forest(X_train, y_train, params)
        return forest.predict_forest(model, X_test)
    if model_kind == "gbt":
        params = replace(gbt.GbtParams(**params_dict), seed=seed)
        model = gbt.fit_gbt(X_train, y_train, params)
        return gbt.predict_gbt(model, X_test)
    raise ValueError(f"unknown model kind: {model_kind!r}")


def grid_search(model_kind: str, grid: dict, X, y, cv: CvPlan, threads: int = 1):
    """Exhaustive search over the Cartesian product of `grid`.

    Combinations enumerate in the grid's key-insertion order. Score is the
    mean held-out-fold RMSE in log space; the lowest mean wins, ties going
    to the earlier combination. Returns (best params, score table) with one
    table row per combination.
    """
    keys = list(grid.keys())
    combos = [dict(zip(keys, values))
              for values in itertools.product(*(grid[key] for key in keys))]
    tasks = []
    for combo_index, combo in enumerate(combos):
        for fold_index in range(cv.k):
            tasks.append((combo_index, fold_index, combo))

    all_idx = np.arange(X.shape[0])

    def run(task):
        combo_index, fold_index, combo = task
        held = cv.folds[fold_index]
        train = np.setdiff1d(all_idx, held, assume_unique=False)
        seed = int(np.random.SeedSequence(
            entropy=cv.seed, spawn_key=(combo_index, fold_index)).generate_state(1)[0])
        pred = _fit_predict(model_kind, combo, seed, X[train], y[train], X[held])
        return float(np.sqrt(np.mean((pred - y[held]) ** 2)))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scores = list(pool.map(run, tasks))
    else:
        scores = [run(task) for task in tasks]

    table = []
    for combo_index, combo in enumerate(combos):
        fold_rmse = scores[combo_index * cv.k:(combo_index + 1) * cv.k]
        table.append({
            "params": combo,
            "fold_rmse": fold_rmse,
            "mean_rmse": float(np.mean(fold_rmse)),
        })
    best_row = min(table, key=lambda row: row["mean_rmse"])  # first minimum wins
    return dict(best_row["params"]), table


def residual_analysis(true_days, pred_days):
    """Per-bin count, MAE and mean signed error (positive = overestimate)
    over duration bins [0,10), [10,40), [40,inf)."""
    true_days = np.asarray(true_days, dtype=float)
    pred_days = np.asarray(pred_days, dtype=float)
    if true_days.shape != pred_days.shape:
        raise LengthMismatch(true_days.shape, pred_days.shape)
    bins = []
    for lo, hi in zip(RESIDUAL_BIN_EDGES, RESIDUAL_BIN_EDGES[1:]):
        mask = (true_days >= lo) & (true_days < hi)
        err = pred_days[mask] - true_days[mask]
        bins.append({
            "lo": lo,
            "hi": hi,
            "count": int(mask.sum()),
            "mae": float(np.mean(np.abs(err))) if mask.any() else float("nan"),
            "mean_signed_error": float(np.mean(err)) if mask.any() else float("nan"),
        })
    return bins
