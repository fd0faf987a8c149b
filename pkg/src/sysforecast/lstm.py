"""Single-layer LSTM with a scalar sigmoid head, written against numpy.

Gate order in the stacked matrices is (input, forget, candidate, output);
the recurrence is the standard non-peephole form

    i, f, o = sigmoid(W x + U h + b);  g = tanh(W x + U h + b)
    c' = f * c + i * g;                h' = o * tanh(c')

and the prediction is ``sigmoid(w_out . h_T + b_out)``, which keeps the
output inside (0, 1). Training minimizes mean squared error with
backpropagation through time and Adam-style first/second-moment updates;
everything is deterministic for a given seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .errors import DimensionMismatchError, EmptyDatasetError


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -60.0, 60.0)))


@dataclass
class TrainConfig:
    hidden: int = 32
    history: int = 10
    horizon: int = 1
    epochs: int = 50
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    seed: int = 0


@dataclass
class LstmParams:
    """Stacked gate parameters plus the scalar output head.

    ``w_in`` is (4H, D), ``w_rec`` is (4H, H), ``bias`` is (4H,); rows are
    grouped i/f/g/o. ``w_out`` is (H,), ``b_out`` a length-1 array.
    """

    w_in: np.ndarray
    w_rec: np.ndarray
    bias: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray

    @property
    def hidden(self) -> int:
        return self.w_rec.shape[1]

    @property
    def input_dim(self) -> int:
        return self.w_in.shape[1]

    def arrays(self) -> list[np.ndarray]:
        return [self.w_in, self.w_rec, self.bias, self.w_out, self.b_out]

    def copy(self) -> "LstmParams":
        return LstmParams(*[a.copy() for a in self.arrays()])


@dataclass
class ForwardCache:
    """Per-timestep activations retained for backpropagation through time."""

    inputs: np.ndarray        # (B, T, D)
    gates: np.ndarray         # (T, B, 4H), post-nonlinearity
    cells: np.ndarray         # (T, B, H)
    tanh_cells: np.ndarray    # (T, B, H)
    hiddens: np.ndarray       # (T, B, H)
    predictions: np.ndarray = field(repr=False, default=None)


def init_params(hidden: int, input_dim: int, rng: np.random.Generator) -> LstmParams:
    """Uniform(-H^-0.5, H^-0.5) weights, forget-gate bias 1, other biases 0."""
    r = hidden ** -0.5
    bias = np.zeros(4 * hidden)
    bias[hidden : 2 * hidden] = 1.0
    return LstmParams(
        w_in=rng.uniform(-r, r, (4 * hidden, input_dim)),
        w_rec=rng.uniform(-r, r, (4 * hidden, hidden)),
        bias=bias,
        w_out=rng.uniform(-r, r, hidden),
        b_out=np.zeros(1),
    )


def _as_batch(inputs) -> np.ndarray:
    x = np.asarray(inputs, dtype=float)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3:
        raise DimensionMismatchError(
            f"inputs must be (steps, dim) or (batch, steps, dim), got shape {x.shape}"
        )
    return x


def _forward_batch(params: LstmParams, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    batch, steps, dim = x.shape
    if dim != params.input_dim:
        raise DimensionMismatchError(
            f"input dim {dim} does not match params input dim {params.input_dim}"
        )
    hid = params.hidden
    gates = np.empty((steps, batch, 4 * hid))
    cells = np.empty((steps, batch, hid))
    tanh_cells = np.empty((steps, batch, hid))
    hiddens = np.empty((steps, batch, hid))
    h = np.zeros((batch, hid))
    c = np.zeros((batch, hid))
    for t in range(steps):
        z = x[:, t] @ params.w_in.T + h @ params.w_rec.T + params.bias
        a = np.empty_like(z)
        a[:, : 2 * hid] = sigmoid(z[:, : 2 * hid])          # i, f
        a[:, 2 * hid : 3 * hid] = np.tanh(z[:, 2 * hid : 3 * hid])  # g
        a[:, 3 * hid :] = sigmoid(z[:, 3 * hid :])          # o
        c = a[:, hid : 2 * hid] * c + a[:, :hid] * a[:, 2 * hid : 3 * hid]
        tc = np.tanh(c)
        h = a[:, 3 * hid :] * tc
        gates[t], cells[t], tanh_cells[t], hiddens[t] = a, c, tc, h
    preds = sigmoid(hiddens[-1] @ params.w_out + params.b_out[0])
    return preds, ForwardCache(x, gates, cells, tanh_cells, hiddens, preds)


def forward(params: LstmParams, inputs) -> tuple[float, ForwardCache]:
    """Run one sequence of feature vectors; prediction lies in (0, 1)."""
    x = _as_batch(inputs)
    preds, cache = _forward_batch(params, x)
    return float(preds[0]), cache


def _backward_batch(
    params: LstmParams, cache: ForwardCache, targets: np.ndarray
) -> list[np.ndarray]:
    """Exact gradients of mean((prediction - target)^2) over the batch."""
    x = cache.inputs
    batch, steps, _ = x.shape
    hid = params.hidden
    preds = cache.predictions

    d_zout = (2.0 * (preds - targets) / batch) * preds * (1.0 - preds)
    g_w_out = cache.hiddens[-1].T @ d_zout
    g_b_out = np.array([d_zout.sum()])
    g_w_in = np.zeros_like(params.w_in)
    g_w_rec = np.zeros_like(params.w_rec)
    g_bias = np.zeros_like(params.bias)

    dh = d_zout[:, None] * params.w_out[None, :]
    dc = np.zeros((batch, hid))
    for t in range(steps - 1, -1, -1):
        a = cache.gates[t]
        i = a[:, :hid]
        f = a[:, hid : 2 * hid]
        g = a[:, 2 * hid : 3 * hid]
        o = a[:, 3 * hid :]
        tc = cache.tanh_cells[t]
        dc = dc + dh * o * (1.0 - tc * tc)
        c_prev = cache.cells[t - 1] if t > 0 else 0.0
        dz = np.empty((batch, 4 * hid))
        dz[:, :hid] = dc * g * i * (1.0 - i)
        dz[:, hid : 2 * hid] = dc * c_prev * f * (1.0 - f)
        dz[:, 2 * hid : 3 * hid] = dc * i * (1.0 - g * g)
        dz[:, 3 * hid :] = dh * tc * o * (1.0 - o)
        g_w_in += dz.T @ x[:, t]
        if t > 0:
            g_w_rec += dz.T @ cache.hiddens[t - 1]
        g_bias += dz.sum(axis=0)
        dh = dz @ params.w_rec
        dc = dc * f
    return [g_w_in, g_w_rec, g_bias, g_w_out, g_b_out]


def backward(params: LstmParams, cache: ForwardCache, inputs, target: float):
    """Gradients of (prediction - target)^2 for a single cached sequence."""
    del inputs  # the cache already holds them; kept for call-site clarity
    return _backward_batch(params, cache, np.atleast_1d(np.asarray(target, dtype=float)))


def predict(params: LstmParams, feature_history) -> float:
    """Forward pass without retaining the cache."""
    pred, _ = forward(params, feature_history)
    return pred


def predict_batch(params: LstmParams, x) -> np.ndarray:
    preds, _ = _forward_batch(params, _as_batch(x))
    return preds


def train(
    x, y, config: TrainConfig | None = None
) -> tuple[LstmParams, list[float]]:
    """Minibatch training with seeded shuffling; returns per-epoch train MSE."""
    if config is None:
        config = TrainConfig()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 3 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise DimensionMismatchError(
            f"expected x (n, steps, dim) and matching y (n,), got {x.shape} / {y.shape}"
        )
    n = x.shape[0]
    if n == 0:
        raise EmptyDatasetError("no training samples")

    rng = np.random.default_rng(config.seed)
    params = init_params(config.hidden, x.shape[2], rng)
    arrays = params.arrays()
    first_moments = [np.zeros_like(a) for a in arrays]
    second_moments = [np.zeros_like(a) for a in arrays]
    b1, b2, eps = config.beta1, config.beta2, config.epsilon
    step = 0
    loss_history = []
    for _ in range(config.epochs):
        order = rng.permutation(n)
        squared_error = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            preds, cache = _forward_batch(params, x[idx])
            grads = _backward_batch(params, cache, y[idx])
            squared_error += float(np.sum((preds - y[idx]) ** 2))
            step += 1
            for a, grad, m, v in zip(arrays, grads, first_moments, second_moments):
                m *= b1
                m += (1.0 - b1) * grad
                v *= b2
                v += (1.0 - b2) * grad * grad
                m_hat = m / (1.0 - b1 ** step)
                v_hat = v / (1.0 - b2 ** step)
                a -= config.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        loss_history.append(squared_error / n)
    return params, loss_history


def save_model(params: LstmParams, config: TrainConfig, path) -> None:
    """JSON model file: dims, row-major flattened matrices, config echo."""
    doc = {
        "hidden": params.hidden,
        "input_dim": params.input_dim,
        "w_in": params.w_in.ravel().tolist(),
        "w_rec": params.w_rec.ravel().tolist(),
        "bias": params.bias.tolist(),
        "w_out": params.w_out.tolist(),
        "b_out": float(params.b_out[0]),
        "config": {
            "hidden": config.hidden,
            "history": config.history,
            "horizon": config.horizon,
            "epochs": config.epochs,
            "learning_rate": config.learning_rate,
            "batch_size": config.batch_size,
            "seed": config.seed,
        },
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path) -> tuple[LstmParams, TrainConfig]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    hid = int(doc["hidden"])
    dim = int(doc["input_dim"])
    params = LstmParams(
        w_in=np.array(doc["w_in"], dtype=float).reshape(4 * hid, dim),
        w_rec=np.array(doc["w_rec"], dtype=float).reshape(4 * hid, hid),
        bias=np.array(doc["bias"], dtype=float),
        w_out=np.array(doc["w_out"], dtype=float),
        b_out=np.array([doc["b_out"]], dtype=float),
    )
    config = TrainConfig(**doc["config"])
    return params, config


class LstmForecaster(RegressorMixin, BaseEstimator):
    """Estimator facade: fit on (n, history, dim) sequences, predict scalars."""

    def __init__(
        self,
        hidden=32,
        history=10,
        horizon=1,
        epochs=50,
        learning_rate=1e-3,
        batch_size=32,
        seed=0,
    ):
        self.hidden = hidden
        self.history = history
        self.horizon = horizon
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.seed = seed

    def _config(self) -> TrainConfig:
        return TrainConfig(
            hidden=self.hidden,
            history=self.history,
            horizon=self.horizon,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            seed=self.seed,
        )

    def fit(self, X, y):
        params, losses = train(X, y, self._config())
        self.params_ = params
        self.loss_history_ = losses
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        return predict_batch(self.params_, X)


def with_geometry(config: TrainConfig, history: int, horizon: int) -> TrainConfig:
    """Copy of the config pinned to one (history, horizon) grid cell."""
    return replace(config, history=history, horizon=horizon)
