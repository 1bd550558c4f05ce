"""Random forest of Gini-split decision trees over binary features."""

import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from ..errors import ConfigError, DegenerateLabels, DimensionMismatch

LEAF = -1


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_features: Optional[int] = None  # default floor(sqrt(F))
    min_samples_split: int = 2
    seed: int = 42

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if self.min_samples_split < 2:
            raise ConfigError("min_samples_split must be >= 2")
        if self.max_features is not None and self.max_features < 1:
            raise ConfigError("max_features must be >= 1")


@dataclass
class DecisionTree:
    """Flat array tree. Node ``k`` tests ``x[feature[k]] == 1``: yes goes
    to ``right[k]``, no to ``left[k]``. Leaves have ``feature == -1`` and
    carry their class in ``value``."""

    feature: List[int] = field(default_factory=list)
    left: List[int] = field(default_factory=list)
    right: List[int] = field(default_factory=list)
    value: List[int] = field(default_factory=list)

    def _add(self, feature, value):
        self.feature.append(feature)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        return len(self.feature) - 1

    @property
    def depth(self):
        def walk(k):
            if self.feature[k] == LEAF:
                return 0
            return 1 + max(walk(self.left[k]), walk(self.right[k]))
        return walk(0)

    def used_features(self):
        return sorted({f for f in self.feature if f != LEAF})

    def predict(self, x):
        out = np.empty(x.shape[0], dtype=int)
        for i, row in enumerate(x):
            k = 0
            while self.feature[k] != LEAF:
                k = self.right[k] if row[self.feature[k]] > 0.5 else self.left[k]
            out[i] = self.value[k]
        return out


@dataclass
class ForestModel:
    trees: List[DecisionTree]
    n_features: int
    max_features: int
    seed: int
    oob_score: np.ndarray  # fraction of out-of-bag trees voting Won; NaN if never out of bag

    @property
    def n_trees(self):
        return len(self.trees)

    def to_json(self):
        return json.dumps(
            {
                "n_features": self.n_features,
                "max_features": self.max_features,
                "seed": self.seed,
                "trees": [asdict(t) for t in self.trees],
            },
            sort_keys=True,
        )


def gini(counts):
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return 1.0 - float(np.dot(p, p))


def _majority(y):
    # ties go to Lost
    return int(2 * y.sum() > y.size)


def _best_split(x, y, rng, max_features):
    """Best Gini split among a random draw of ``max_features`` features.

    Like common implementations, keeps drawing past ``max_features`` while
    no candidate has separated the samples yet.
    """
    n = y.size
    pos = y.sum()
    best, best_score = None, np.inf
    for tried, f in enumerate(rng.permutation(x.shape[1]), start=1):
        mask = x[:, f] > 0.5
        n_r = int(mask.sum())
        if 0 < n_r < n:
            pos_r = int(y[mask].sum())
            right = np.array([n_r - pos_r, pos_r], dtype=float)
            left = np.array([n - n_r - (pos - pos_r), pos - pos_r], dtype=float)
            score = (n_r * gini(right) + (n - n_r) * gini(left)) / n
            if score < best_score:
                best, best_score = int(f), score
        if tried >= max_features and best is not None:
            break
    return best


def grow_tree(x, y, rng, max_features, min_samples_split=2):
    tree = DecisionTree()
    stack = [(tree._add(LEAF, _majority(y)), np.arange(y.size))]
    while stack:
        node, idx = stack.pop()
        ys = y[idx]
        if idx.size < min_samples_split or ys.min() == ys.max():
            continue
        f = _best_split(x[idx], ys, rng, max_features)
        if f is None:
            continue
        mask = x[idx, f] > 0.5
        tree.feature[node] = f
        l_idx, r_idx = idx[~mask], idx[mask]
        tree.left[node] = tree._add(LEAF, _majority(y[l_idx]))
        tree.right[node] = tree._add(LEAF, _majority(y[r_idx]))
        stack.append((tree.right[node], r_idx))
        stack.append((tree.left[node], l_idx))
    return tree


def _check_binary(x):
    if not np.all((x == 0) | (x == 1)):
        raise ConfigError("random forest expects a binary (one-hot) design matrix")


def train_random_forest(x, y, config=None):
    config = config or ForestConfig()
    x = np.asarray(x)
    y = np.asarray(y, dtype=int)
    if x.ndim != 2 or x.shape[0] != y.size:
        raise DimensionMismatch(f"X has shape {x.shape} but y has {y.size} labels")
    _check_binary(x)
    if y.size == 0 or y.min() == y.max():
        raise DegenerateLabels("training labels contain a single class")
    n, f = x.shape
    m = config.max_features or max(1, math.isqrt(f))
    m = min(m, f)
    votes = np.zeros(n)
    seen = np.zeros(n)
    trees = []
    for t in range(config.n_trees):
        rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(t,)))
        boot = rng.integers(0, n, size=n)
        tree = grow_tree(x[boot], y[boot], rng, m, config.min_samples_split)
        trees.append(tree)
        oob = np.ones(n, dtype=bool)
        oob[boot] = False
        if oob.any():
            votes[oob] += tree.predict(x[oob])
            seen[oob] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        oob_score = np.where(seen > 0, votes / np.maximum(seen, 1), np.nan)
    return ForestModel(trees, f, m, config.seed, oob_score)


def predict_forest(model, x):
    """``(classes, scores)``; score is the fraction of trees voting Won."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise DimensionMismatch(f"expected {model.n_features} features, got shape {x.shape}")
    votes = np.zeros(x.shape[0])
    for tree in model.trees:
        votes += tree.predict(x)
    scores = votes / model.n_trees
    return (scores > 0.5).astype(int), scores
