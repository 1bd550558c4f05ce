"""Spectral graph convolution network for two-label transductive classification.

Layers propagate ``H_i = ReLU(Â_norm @ H_{i-1} @ W_i)`` with ``Â = A + I``
and either the inverse-degree (``D^-1 Â``) or symmetric
(``D^-1/2 Â D^-1/2``) normalization. A logistic head turns the last
hidden layer into a per-node probability of class Won. Training is
full-batch gradient descent on the cross-entropy of the two labeled nodes,
with gradients from explicit backpropagation.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .errors import ConfigError, DimensionMismatch, NonFiniteLoss
from .metrics import FeatureMatrix

SYMMETRIC = "sym"
INVERSE_DEGREE = "inv"
VARIANTS = (SYMMETRIC, INVERSE_DEGREE)

PROB_CLAMP = 1e-12
_MAGIC = "crmgraph-gcn 1"


@dataclass(frozen=True)
class NormalizedAdjacency:
    matrix: np.ndarray
    variant: str
    node_ids: Optional[Tuple[str, ...]] = None

    @property
    def n(self):
        return self.matrix.shape[0]


def normalize_adjacency(graph, variant=SYMMETRIC):
    """Self-looped, degree-normalized adjacency of a projection or a 0/1 matrix."""
    if variant not in VARIANTS:
        raise ConfigError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if isinstance(graph, np.ndarray):
        a, node_ids = np.asarray(graph, dtype=float), None
    else:
        a, node_ids = graph.adjacency(), graph.node_ids
    a_hat = a + np.eye(a.shape[0])
    deg = a_hat.sum(axis=1)
    if variant == INVERSE_DEGREE:
        m = a_hat / deg[:, None]
    else:
        s = 1.0 / np.sqrt(deg)
        m = s[:, None] * a_hat * s[None, :]
    return NormalizedAdjacency(m, variant, node_ids)


@dataclass(frozen=True)
class TrainConfig:
    hidden: Tuple[int, ...] = (16, 8)
    lr: float = 0.05
    epochs: int = 500
    seed: int = 42
    variant: str = SYMMETRIC
    init: str = "xavier_uniform"
    frozen_layers: bool = False

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not self.hidden or any(h < 1 for h in self.hidden):
            raise ConfigError(f"hidden dims must be >= 1, got {self.hidden}")
        if not self.lr > 0:
            raise ConfigError(f"learning rate must be > 0, got {self.lr}")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ConfigError(f"epochs must be an integer >= 1, got {self.epochs}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.init != "xavier_uniform":
            raise ConfigError(f"unsupported init scheme {self.init!r}")


@dataclass
class GcnModel:
    weights: List[np.ndarray]
    head_w: np.ndarray
    head_b: float
    variant: str = SYMMETRIC
    seed: int = 0
    frozen_layers: bool = False

    def __post_init__(self):
        self.weights = [np.asarray(w, dtype=float) for w in self.weights]
        self.head_w = np.asarray(self.head_w, dtype=float).reshape(-1)
        self.head_b = float(self.head_b)
        if not self.weights:
            raise DimensionMismatch("model needs at least one layer")
        for prev, cur in zip(self.weights, self.weights[1:]):
            if prev.shape[1] != cur.shape[0]:
                raise DimensionMismatch(f"layer shapes {prev.shape} -> {cur.shape} do not chain")
        if self.weights[-1].shape[1] != self.head_w.shape[0]:
            raise DimensionMismatch("head width does not match last layer")

    @property
    def dims(self):
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    def parameters(self):
        return list(self.weights) + [self.head_w, np.array([self.head_b])]

    def with_parameters(self, params):
        *ws, hw, hb = params
        return GcnModel(list(ws), hw, float(np.asarray(hb).reshape(-1)[0]),
                        self.variant, self.seed, self.frozen_layers)

    def save(self, path):
        lines = [
            _MAGIC,
            f"variant {self.variant}",
            f"seed {self.seed}",
            f"frozen {int(self.frozen_layers)}",
            "dims " + " ".join(str(d) for d in self.dims),
        ]
        for k, w in enumerate(self.weights, start=1):
            lines.append(f"matrix W{k} {w.shape[0]} {w.shape[1]}")
            lines.extend(" ".join("%.17g" % v for v in row) for row in w)
        lines.append(f"head {self.head_w.shape[0]}")
        lines.append(" ".join("%.17g" % v for v in self.head_w))
        lines.append("bias %.17g" % self.head_b)
        path = Path(path)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path):
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or lines[0] != _MAGIC:
            raise ConfigError(f"{path}: not a saved GCN model")
        it = iter(lines[1:])

        def field_(name):
            key, _, value = next(it).partition(" ")
            if key != name:
                raise ConfigError(f"{path}: expected {name!r}, got {key!r}")
            return value

        variant = field_("variant")
        seed = int(field_("seed"))
        frozen = bool(int(field_("frozen")))
        dims = [int(d) for d in field_("dims").split()]
        weights = []
        for k in range(1, len(dims)):
            _, r, c = field_("matrix").split()
            w = np.array([[float(v) for v in next(it).split()] for _ in range(int(r))])
            weights.append(w.reshape(int(r), int(c)))
        width = int(field_("head"))
        head_w = np.array([float(v) for v in next(it).split()]).reshape(width)
        bias = float(field_("bias"))
        return cls(weights, head_w, bias, variant, seed, frozen)


@dataclass
class ForwardPass:
    pre: List[np.ndarray]  # Â H_{i-1} W_i per layer
    hidden: List[np.ndarray]  # H_0 = X, then H_1..H_L
    logits: np.ndarray
    probabilities: np.ndarray

    @property
    def embeddings(self):
        return self.hidden[-1]


@dataclass
class TrainingOutcome:
    losses: np.ndarray  # loss at the start of each epoch
    final_loss: float
    embeddings: np.ndarray
    probabilities: np.ndarray


def sigmoid(z):
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _xavier(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_model(in_dim, config):
    rng = np.random.default_rng(config.seed)
    dims = (in_dim,) + config.hidden
    weights = [_xavier(rng, a, b) for a, b in zip(dims, dims[1:])]
    head_w = _xavier(rng, dims[-1], 1).reshape(-1)
    return GcnModel(weights, head_w, 0.0, config.variant, config.seed, config.frozen_layers)


def _matrix(x):
    return x.values if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=float)


def _check(model, adj, x):
    if x.ndim != 2 or x.shape[1] != model.dims[0]:
        raise DimensionMismatch(f"features have shape {x.shape}, model expects {model.dims[0]} columns")
    if adj.matrix.shape != (x.shape[0], x.shape[0]):
        raise DimensionMismatch(f"adjacency {adj.matrix.shape} does not match {x.shape[0]} feature rows")


def _forward(model, a, x, ax=None):
    pre, hidden = [], [x]
    h = x
    for k, w in enumerate(model.weights):
        z = (ax @ w) if (k == 0 and ax is not None) else a @ (h @ w)
        h = np.maximum(z, 0.0)
        pre.append(z)
        hidden.append(h)
    logits = h @ model.head_w + model.head_b
    return ForwardPass(pre, hidden, logits, sigmoid(logits))


def forward(model, adj, x):
    x = _matrix(x)
    _check(model, adj, x)
    return _forward(model, adj.matrix, x)


def pair_loss(probabilities, won, lost):
    """Mean cross-entropy of the Won and Lost training nodes."""
    p_won = np.clip(probabilities[won], PROB_CLAMP, 1.0 - PROB_CLAMP)
    p_lost = np.clip(probabilities[lost], PROB_CLAMP, 1.0 - PROB_CLAMP)
    return float(-0.5 * (np.log(p_won) + np.log1p(-p_lost)))


def loss(probabilities, projection):
    won, lost = projection.require_train_pair()
    return pair_loss(np.asarray(probabilities), won, lost)


def _backward(model, a, fp, won, lost, ax=None):
    """Gradients of :func:`pair_loss` w.r.t. ``model.parameters()``."""
    n = fp.logits.shape[0]
    g = np.zeros(n)
    for idx, target in ((won, 1.0), (lost, 0.0)):
        p = fp.probabilities[idx]
        if PROB_CLAMP < p < 1.0 - PROB_CLAMP:
            g[idx] += 0.5 * (p - target)
    h_last = fp.hidden[-1]
    grad_head_w = h_last.T @ g
    grad_head_b = np.array([g.sum()])
    d_h = np.outer(g, model.head_w)
    grads = [None] * len(model.weights)
    for k in range(len(model.weights) - 1, -1, -1):
        d_z = d_h * (fp.pre[k] > 0)
        if k == 0 and ax is not None:
            grads[k] = ax.T @ d_z
        else:
            a_t_dz = a.T @ d_z
            grads[k] = fp.hidden[k].T @ a_t_dz
            if k > 0:
                d_h = a_t_dz @ model.weights[k].T
    return grads + [grad_head_w, grad_head_b]


def loss_and_gradients(model, adj, x, won, lost):
    x = _matrix(x)
    _check(model, adj, x)
    fp = _forward(model, adj.matrix, x)
    return pair_loss(fp.probabilities, won, lost), _backward(model, adj.matrix, fp, won, lost)


def train(projection, x, config=None):
    """Fit a fresh model on the projection's two training nodes.

    Returns ``(model, outcome)``. With ``config.frozen_layers`` only the
    logistic head is updated and the convolution weights keep their
    random initialization.
    """
    config = config or TrainConfig()
    won, lost = projection.require_train_pair()
    x = _matrix(x)
    adj = normalize_adjacency(projection, config.variant)
    model = init_model(x.shape[1], config)
    _check(model, adj, x)
    a = adj.matrix
    ax = a @ x
    params = [p.copy() for p in model.parameters()]
    n_layers = len(model.weights)
    losses = np.empty(config.epochs)
    for epoch in range(config.epochs):
        fp = _forward(model, a, x, ax)
        value = pair_loss(fp.probabilities, won, lost)
        if not np.isfinite(value):
            raise NonFiniteLoss(epoch + 1)
        losses[epoch] = value
        grads = _backward(model, a, fp, won, lost, ax)
        start = n_layers if config.frozen_layers else 0
        for k in range(start, len(params)):
            params[k] = params[k] - config.lr * grads[k]
        if not all(np.all(np.isfinite(p)) for p in params):
            raise NonFiniteLoss(epoch + 1)
        model = model.with_parameters(params)
    fp = _forward(model, a, x, ax)
    final = pair_loss(fp.probabilities, won, lost)
    if not np.isfinite(final):
        raise NonFiniteLoss(config.epochs)
    return model, TrainingOutcome(losses, final, fp.embeddings, fp.probabilities)


def classify(probabilities):
    """1 (Won) iff probability > 0.5; an exact 0.5 goes to Lost."""
    return (np.asarray(probabilities) > 0.5).astype(int)


def predict(model, adj, x):
    fp = forward(model, adj, x)
    return fp.probabilities, classify(fp.probabilities)
