"""Single-cell LSTM regressor over static feature vectors.

The cell is applied to a length-1 sequence: numeric features are
concatenated with embedding lookups for categorical codes, fed through the
standard gate equations with zero initial state, and a dense head reads the
hidden state. The recurrent U matrices vanish with zero initial state but
are implemented (and gradient-checked) for nonzero state so multi-step
inputs remain possible.

All training arithmetic is float64, which is what makes the
finite-difference gradient checks meaningful.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import CodeOutOfRange, EmptyDataset, ShapeMismatch

GATES = ("i", "f", "g", "o")

UNITS_CHOICES = tuple(range(32, 257, 32))
DROPOUT_RANGE = (0.0, 0.5)
LOG10_LR_RANGE = (-4.0, -2.0)
N_TRIALS = 10


@dataclass(frozen=True)
class LstmParams:
    """Tuned defaults: units 192, dropout 0.1, learning rate 1e-3."""

    units: int = 192
    dropout: float = 0.1
    learning_rate: float = 0.001
    epochs: int = 100
    batch_size: int = 64
    patience: int = 10
    seed: int = 0


def default_embedding_dim(n_categories: int) -> int:
    """min(8, ceil(k/2)) for k seen categories, never below 1."""
    return max(1, min(8, math.ceil(n_categories / 2)))


class LstmWeights:
    """Named tensors: per-column embeddings, four gate W/U/b triples and the
    dense head. Forget bias starts at 1."""

    def __init__(self, embeddings, W, U, b, w_out, b_out):
        self.embeddings = embeddings    # list of (rows, dim) arrays
        self.W = W                      # gate -> (units, input_dim)
        self.U = U                      # gate -> (units, units)
        self.b = b                      # gate -> (units,)
        self.w_out = w_out              # (units,)
        self.b_out = b_out              # () array

    @property
    def units(self) -> int:
        return self.w_out.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W["i"].shape[1]

    @property
    def n_numeric(self) -> int:
        return self.input_dim - sum(e.shape[1] for e in self.embeddings)

    def tensors(self):
        """Fixed iteration order shared by the optimizer, serializer and
        gradient checks."""
        for idx, table in enumerate(self.embeddings):
            yield f"E{idx}", table
        for gate in GATES:
            yield f"W_{gate}", self.W[gate]
            yield f"U_{gate}", self.U[gate]
            yield f"b_{gate}", self.b[gate]
        yield "w_out", self.w_out
        yield "b_out", self.b_out

    def copy(self) -> "LstmWeights":
        return copy.deepcopy(self)


def _glorot(rng, shape):
    fan_in = shape[1] if len(shape) == 2 else shape[0]
    fan_out = shape[0]
    scale = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-scale, scale, size=shape)


def init_weights(n_numeric: int, category_sizes, units: int, seed: int,
                 embedding_dims=None) -> LstmWeights:
    """category_sizes are embedding-table row counts (seen categories plus
    the reserved unseen code)."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if embedding_dims is None:
        embedding_dims = [default_embedding_dim(size - 1) for size in category_sizes]
    embeddings = [rng.normal(0.0, 0.1, size=(size, dim))
                  for size, dim in zip(category_sizes, embedding_dims)]
    input_dim = n_numeric + sum(dim for dim in embedding_dims)
    W = {gate: _glorot(rng, (units, input_dim)) for gate in GATES}
    U = {gate: _glorot(rng, (units, units)) for gate in GATES}
    b = {gate: np.zeros(units) for gate in GATES}
    b["f"] = np.ones(units)
    w_out = _glorot(rng, (units, 1))[:, 0]
    return LstmWeights(embeddings, W, U, b, w_out, np.zeros(()))


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _embed(weights: LstmWeights, x_num, x_cat):
    batch = x_num.shape[0]
    parts = [x_num]
    for col, table in enumerate(weights.embeddings):
        codes = x_cat[:, col]
        if codes.min(initial=0) < 0 or codes.max(initial=0) >= table.shape[0]:
            bad = int(codes.min()) if codes.min(initial=0) < 0 else int(codes.max())
            raise CodeOutOfRange(col, bad, table.shape[0])
        parts.append(table[codes])
    if len(parts) == 1:
        return x_num.reshape(batch, -1)
    return np.concatenate(parts, axis=1)


def lstm_forward(weights: LstmWeights, x_num, x_cat, h0=None, c0=None,
                 training: bool = False, dropout: float = 0.0, rng=None):
    """Run the cell once. Returns (predictions, cache for backward).

    Inverted dropout is applied to the hidden state only when training and
    dropout > 0, so inference needs no rescaling.
    """
    x_num = np.atleast_2d(np.asarray(x_num, dtype=float))
    x_cat = np.asarray(x_cat, dtype=int)
    if x_cat.ndim == 1:
        x_cat = x_cat.reshape(x_num.shape[0], -1)
    batch = x_num.shape[0]
    units = weights.units
    x = _embed(weights, x_num, x_cat)
    if x.shape[1] != weights.input_dim:
        raise ShapeMismatch(
            f"input width {x.shape[1]} does not match weights ({weights.input_dim})")
    h0 = np.zeros((batch, units)) if h0 is None else np.atleast_2d(h0)
    c0 = np.zeros((batch, units)) if c0 is None else np.atleast_2d(c0)

    z = {gate: x @ weights.W[gate].T + h0 @ weights.U[gate].T + weights.b[gate]
         for gate in GATES}
    i = _sigmoid(z["i"])
    f = _sigmoid(z["f"])
    g = np.tanh(z["g"])
    o = _sigmoid(z["o"])
    c = f * c0 + i * g
    tc = np.tanh(c)
    h = o * tc
    mask = None
    if training and dropout > 0.0:
        if rng is None:
            raise ValueError("dropout during training needs an rng")
        mask = (rng.random(h.shape) >= dropout) / (1.0 - dropout)
        h = h * mask
    yhat = h @ weights.w_out + float(weights.b_out)
    cache = {
        "x": x, "x_cat": x_cat, "h0": h0, "c0": c0,
        "i": i, "f": f, "g": g, "o": o, "c": c, "tc": tc,
        "h": h, "mask": mask, "yhat": yhat, "n_numeric": weights.n_numeric,
    }
    return yhat, cache


def mse_loss(yhat, y) -> float:
    yhat = np.asarray(yhat, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.mean((yhat - y) ** 2))


def lstm_backward(weights: LstmWeights, cache: dict, y) -> dict:
    """Exact gradients of mean-squared error w.r.t. every tensor.

    Embedding rows for codes absent from the batch receive exactly zero
    gradient (scatter-add accumulation).
    """
    y = np.asarray(y, dtype=float)
    yhat = cache["yhat"]
    if y.shape[0] != yhat.shape[0]:
        raise ShapeMismatch(f"batch size {yhat.shape[0]} vs targets {y.shape[0]}")
    batch = y.shape[0]
    x, h0, c0 = cache["x"], cache["h0"], cache["c0"]
    i, f, g, o = cache["i"], cache["f"], cache["g"], cache["o"]
    tc = cache["tc"]

    dyhat = 2.0 * (yhat - y) / batch
    grads = {"w_out": cache["h"].T @ dyhat, "b_out": np.asarray(dyhat.sum())}
    dh = np.outer(dyhat, weights.w_out)
    if cache["mask"] is not None:
        dh = dh * cache["mask"]
    do = dh * tc
    dtc = dh * o
    dc = dtc * (1.0 - tc * tc)
    df = dc * c0
    di = dc * g
    dg = dc * i
    dz = {
        "i": di * i * (1.0 - i),
        "f": df * f * (1.0 - f),
        "g": dg * (1.0 - g * g),
        "o": do * o * (1.0 - o),
    }
    dx = np.zeros_like(x)
    for gate in GATES:
        grads[f"W_{gate}"] = dz[gate].T @ x
        grads[f"U_{gate}"] = dz[gate].T @ h0
        grads[f"b_{gate}"] = dz[gate].sum(axis=0)
        dx += dz[gate] @ weights.W[gate]

    offset = cache["n_numeric"]
    for col, table in enumerate(weights.embeddings):
        dim = table.shape[1]
        dtable = np.zeros_like(table)
        np.add.at(dtable, cache["x_cat"][:, col], dx[:, offset:offset + dim])
        grads[f"E{col}"] = dtable
        offset += dim
    return grads


def lstm_predict(weights: LstmWeights, x_num, x_cat) -> np.ndarray:
    yhat, _ = lstm_forward(weights, x_num, x_cat, training=False)
    return yhat


class _Adam:
    def __init__(self, weights: LstmWeights, lr: float,
                 beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {name: np.zeros_like(t) for name, t in weights.tensors()}
        self.v = {name: np.zeros_like(t) for name, t in weights.tensors()}
        self.t = 0

    def step(self, weights: LstmWeights, grads: dict):
        self.t += 1
        scale = self.lr * math.sqrt(1.0 - self.beta2 ** self.t) / (1.0 - self.beta1 ** self.t)
        for name, tensor in weights.tensors():
            grad = grads[name]
            m = self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * grad
            v = self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * grad * grad
            tensor -= scale * m / (np.sqrt(v) + self.eps)


def _val_rmse(weights, x_num, x_cat, y) -> float:
    pred = lstm_predict(weights, x_num, x_cat)
    return float(np.sqrt(np.mean((pred - y) ** 2)))


def fit_lstm(x_num, x_cat, y, category_sizes, params: LstmParams,
             x_num_val, x_cat_val, y_val, embedding_dims=None):
    """Adam training with seeded shuffling, best-validation-epoch weights
    and early stopping after `patience` stale epochs.

    Returns (weights, curve) where curve rows are
    (epoch, mean train loss, validation RMSE in log space).
    """
    x_num = np.asarray(x_num, dtype=float)
    x_cat = np.asarray(x_cat, dtype=int)
    y = np.asarray(y, dtype=float)
    n = x_num.shape[0]
    if n == 0:
        raise EmptyDataset("fit_lstm needs training rows")
    weights = init_weights(x_num.shape[1], category_sizes, params.units,
                           params.seed, embedding_dims)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=params.seed, spawn_key=(1,)))
    adam = _Adam(weights, params.learning_rate)
    best = weights.copy()
    best_rmse, stale = np.inf, 0
    curve = []
    for epoch in range(params.epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, params.batch_size):
            batch = order[start:start + params.batch_size]
            yhat, cache = lstm_forward(
                weights, x_num[batch], x_cat[batch],
                training=True, dropout=params.dropout, rng=rng)
            losses.append(mse_loss(yhat, y[batch]))
            grads = lstm_backward(weights, cache, y[batch])
            adam.step(weights, grads)
        rmse = _val_rmse(weights, x_num_val, x_cat_val, y_val)
        curve.append((epoch, float(np.mean(losses)), rmse))
        if rmse < best_rmse:
            best_rmse, best, stale = rmse, weights.copy(), 0
        else:
            stale += 1
            if stale >= params.patience:
                break
    return best, curve


@dataclass(frozen=True)
class Trial:
    params: LstmParams
    val_rmse: float
    seed: int


def tune_lstm(x_num, x_cat, y, category_sizes, base_params: LstmParams,
              x_num_val, x_cat_val, y_val, n_trials: int = N_TRIALS,
              seed: int = 0):
    """Seeded random search over units/dropout/learning-rate.

    Stands in for Bayesian optimization at the same 10-trial budget.
    Returns (best trial, all trials); ties keep the earlier trial.
    """
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(99,)))
    trials = []
    for _ in range(n_trials):
        units = int(rng.choice(UNITS_CHOICES))
        dropout = float(rng.uniform(*DROPOUT_RANGE))
        lr = float(10.0 ** rng.uniform(*LOG10_LR_RANGE))
        trial_seed = int(rng.integers(2 ** 31))
        params = replace(base_params, units=units, dropout=dropout,
                         learning_rate=lr, seed=trial_seed)
        weights, _ = fit_lstm(x_num, x_cat, y, category_sizes, params,
                              x_num_val, x_cat_val, y_val)
        rmse = _val_rmse(weights, x_num_val, x_cat_val, y_val)
        trials.append(Trial(params=params, val_rmse=rmse, seed=trial_seed))
    best = min(trials, key=lambda t: t.val_rmse)
    return best, trials
