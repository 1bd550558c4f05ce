"""Feed-forward network baseline (ReLU hidden layers, sigmoid output)."""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..errors import ConfigError, DimensionMismatch, NonFiniteLoss
from ..gcn import PROB_CLAMP, sigmoid


@dataclass(frozen=True)
class MlpConfig:
    hidden: Tuple[int, ...] = (64, 32)
    lr: float = 0.01
    epochs: int = 200
    seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if any(h < 1 for h in self.hidden):
            raise ConfigError(f"hidden dims must be >= 1, got {self.hidden}")
        if not self.lr > 0:
            raise ConfigError("learning rate must be > 0")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ConfigError(f"epochs must be an integer >= 1, got {self.epochs}")


@dataclass
class MlpModel:
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    seed: int
    losses: np.ndarray

    @property
    def dims(self):
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)


def init_mlp(in_dim, config):
    rng = np.random.default_rng(config.seed)
    dims = (in_dim,) + config.hidden + (1,)
    weights, biases = [], []
    for a, b in zip(dims, dims[1:]):
        limit = np.sqrt(6.0 / (a + b))
        weights.append(rng.uniform(-limit, limit, size=(a, b)))
        biases.append(np.zeros(b))
    return MlpModel(weights, biases, config.seed, np.empty(0))


def _forward(weights, biases, x):
    acts, pres = [x], []
    h = x
    last = len(weights) - 1
    for k, (w, b) in enumerate(zip(weights, biases)):
        z = h @ w + b
        pres.append(z)
        h = z if k == last else np.maximum(z, 0.0)
        acts.append(h)
    return pres, acts, sigmoid(pres[-1][:, 0])


def bce(p, y):
    p = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log1p(-p)))


def loss_and_gradients(weights, biases, x, y):
    """Mean cross-entropy and its gradients ``(dW list, db list)``."""
    pres, acts, p = _forward(weights, biases, x)
    inside = (p > PROB_CLAMP) & (p < 1.0 - PROB_CLAMP)
    d = (((p - y) * inside) / y.size)[:, None]
    d_ws, d_bs = [None] * len(weights), [None] * len(weights)
    for k in range(len(weights) - 1, -1, -1):
        d_ws[k] = acts[k].T @ d
        d_bs[k] = d.sum(axis=0)
        if k > 0:
            d = (d @ weights[k].T) * (pres[k - 1] > 0)
    return bce(p, y), d_ws, d_bs


def train_mlp(x, y, config=None):
    config = config or MlpConfig()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or x.shape[0] != y.size:
        raise DimensionMismatch(f"X has shape {x.shape} but y has {y.size} labels")
    model = init_mlp(x.shape[1], config)
    ws, bs = model.weights, model.biases
    losses = np.empty(config.epochs)
    for epoch in range(config.epochs):
        value, d_ws, d_bs = loss_and_gradients(ws, bs, x, y)
        if not np.isfinite(value):
            raise NonFiniteLoss(epoch + 1)
        losses[epoch] = value
        ws = [w - config.lr * g for w, g in zip(ws, d_ws)]
        bs = [b - config.lr * g for b, g in zip(bs, d_bs)]
    return MlpModel(ws, bs, config.seed, losses)


def predict_mlp(model, x):
    """``(classes, scores)``; class 1 iff score > 0.5."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.dims[0]:
        raise DimensionMismatch(f"expected {model.dims[0]} features, got shape {x.shape}")
    _, _, p = _forward(model.weights, model.biases, x)
    return (p > 0.5).astype(int), p
