"""Per-node graph features and feature-matrix assembly.

All functions take a :class:`~crmgraph.store.GraphProjection` and return
arrays in projection node order. Graphs are unweighted and undirected.
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np

from .errors import ConfigError, NotConverged

PAGERANK = "PageRank"
IDENTITY = "Identity"
CLOSENESS = "Closeness"
CLUSTER = "Cluster"
EIGENVECTOR = "Eigenvector"
SHORTEST_PATH = "ShortestPath"

FEATURES = (PAGERANK, IDENTITY, CLOSENESS, CLUSTER, EIGENVECTOR, SHORTEST_PATH)

# Cumulative combinations "1F".."6F"; each rung adds the next feature.
LADDER = {f"{k}F": FEATURES[:k] for k in range(1, len(FEATURES) + 1)}

_ALIASES = {name.lower(): name for name in FEATURES}
_ALIASES.update(
    {
        "pagerank": PAGERANK,
        "identitymatrix": IDENTITY,
        "clustering": CLUSTER,
        "clusteringcoefficient": CLUSTER,
        "eigenvectorcentrality": EIGENVECTOR,
        "closenesscentrality": CLOSENESS,
        "shortest_path": SHORTEST_PATH,
        "shortestpaths": SHORTEST_PATH,
    }
)


def pagerank(projection, damping=0.85, tolerance=1e-9, max_iter=1000):
    """Stationary distribution of the damped random walk.

    Each undirected edge counts as two arcs. Mass on degree-0 nodes is
    spread uniformly. Iterates from the uniform vector until the L1
    change drops below ``tolerance``.
    """
    if not 0.0 < damping < 1.0:
        raise ConfigError(f"damping must lie in (0, 1), got {damping}")
    n = projection.n
    if n == 0:
        return np.zeros(0)
    deg = projection.degrees.astype(float)
    dangling = deg == 0
    inv_deg = np.where(dangling, 0.0, 1.0 / np.maximum(deg, 1.0))
    e = np.array(projection.edges, dtype=int).reshape(-1, 2)
    src = np.concatenate([e[:, 0], e[:, 1]])
    dst = np.concatenate([e[:, 1], e[:, 0]])
    r = np.full(n, 1.0 / n)
    residual = np.inf
    for _ in range(max_iter):
        share = r * inv_deg
        spread = np.bincount(dst, weights=share[src], minlength=n)
        new = damping * (spread + r[dangling].sum() / n) + (1.0 - damping) / n
        new /= new.sum()
        residual = np.abs(new - r).sum()
        r = new
        if residual < tolerance:
            return r
    raise NotConverged("pagerank", max_iter, residual)


def closeness(projection):
    """(N - 1) / sum of hop distances; 0 for a single node."""
    n = projection.n
    out = np.zeros(n)
    if n < 2:
        return out
    for v in range(n):
        d = projection.bfs_distances(v)
        reach = d[d > 0]
        if reach.size:
            out[v] = (n - 1) / reach.sum()
    return out


def clustering_coefficient(projection):
    """Local clustering: closed neighbor pairs / all neighbor pairs."""
    nbr_sets = [set(nb) for nb in projection.neighbors]
    out = np.zeros(projection.n)
    for v, nb in enumerate(projection.neighbors):
        k = len(nb)
        if k < 2:
            continue
        links = sum(len(nbr_sets[u] & nbr_sets[v]) for u in nb) // 2
        out[v] = 2.0 * links / (k * (k - 1))
    return out


def eigenvector_centrality(projection, tolerance=1e-8, max_iter=1000):
    """Principal eigenvector of the adjacency matrix, non-negative, unit L2 norm.

    Power iteration runs on ``A + I``: same eigenvectors, but the spectrum
    shift keeps bipartite graphs from oscillating.
    """
    n = projection.n
    if n == 0:
        return np.zeros(0)
    a = projection.adjacency() + np.eye(n)
    x = np.full(n, 1.0 / np.sqrt(n))
    residual = np.inf
    for _ in range(max_iter):
        y = a @ x
        y /= np.linalg.norm(y)
        residual = np.linalg.norm(y - x)
        x = y
        if residual < tolerance:
            return x
    raise NotConverged("eigenvector centrality", max_iter, residual)


def shortest_path_features(projection):
    """Hop distance to the Lost (column 0) and Won (column 1) training node."""
    won, lost = projection.require_train_pair()
    d_lost = projection.bfs_distances(lost)
    d_won = projection.bfs_distances(won)
    return np.column_stack([d_lost, d_won]).astype(float)


def identity_features(projection):
    return np.eye(projection.n)


@dataclass(frozen=True)
class FeatureSpec:
    features: Tuple[str, ...]
    scaling: bool = True

    def __post_init__(self):
        if not self.features:
            raise ConfigError("feature set must name at least one feature")
        unknown = [f for f in self.features if f not in FEATURES]
        if unknown:
            raise ConfigError(f"unknown features {unknown}; choose from {list(FEATURES)}")
        if len(set(self.features)) != len(self.features):
            raise ConfigError(f"duplicate features in {list(self.features)}")

    @classmethod
    def parse(cls, text, scaling=True):
        """Accept a ladder rung ("3F", "GCN-3F") or a comma list of feature names."""
        text = text.strip()
        rung = text.upper().removeprefix("GCN-")
        if rung in LADDER:
            return cls(LADDER[rung], scaling)
        names = []
        for part in text.split(","):
            key = part.strip().replace(" ", "").lower()
            if key not in _ALIASES:
                raise ConfigError(f"unknown feature {part.strip()!r}")
            names.append(_ALIASES[key])
        return cls(tuple(names), scaling)

    @property
    def name(self):
        for rung, feats in LADDER.items():
            if feats == self.features:
                return rung
        return "+".join(self.features)


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    columns: Tuple[str, ...]
    node_ids: Tuple[str, ...]
    scaled: bool

    @property
    def shape(self):
        return self.values.shape

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("node",) + self.columns)
            for nid, row in zip(self.node_ids, self.values):
                writer.writerow([nid] + [repr(float(v)) for v in row])
        return path


def minmax_columns(values):
    """Scale each column onto [0, 1]; constant columns become 0."""
    lo = values.min(axis=0)
    span = values.max(axis=0) - lo
    out = np.zeros_like(values, dtype=float)
    varying = span > 0
    out[:, varying] = (values[:, varying] - lo[varying]) / span[varying]
    return out


def compute_feature(projection, name, options=None):
    """One feature block as ``(values N x k, column names)``."""
    options = options or {}
    if name == PAGERANK:
        return pagerank(projection, **options.get(PAGERANK, {}))[:, None], (PAGERANK,)
    if name == IDENTITY:
        return identity_features(projection), tuple(f"{IDENTITY}:{nid}" for nid in projection.node_ids)
    if name == CLOSENESS:
        return closeness(projection)[:, None], (CLOSENESS,)
    if name == CLUSTER:
        return clustering_coefficient(projection)[:, None], (CLUSTER,)
    if name == EIGENVECTOR:
        return eigenvector_centrality(projection, **options.get(EIGENVECTOR, {}))[:, None], (EIGENVECTOR,)
    if name == SHORTEST_PATH:
        return shortest_path_features(projection), (f"{SHORTEST_PATH}:Lost", f"{SHORTEST_PATH}:Won")
    raise ConfigError(f"unknown feature {name!r}")


def assemble_features(projection, spec, options=None):
    """Concatenate feature blocks in the order listed, min-max scaling all but Identity.

    ``options`` maps a feature name to keyword arguments for its kernel,
    e.g. ``{"PageRank": {"damping": 0.9}}``.
    """
    blocks, columns = [], []
    for name in spec.features:
        vals, cols = compute_feature(projection, name, options)
        if spec.scaling and name != IDENTITY:
            vals = minmax_columns(vals)
        blocks.append(vals)
        columns.extend(cols)
    values = np.hstack(blocks) if blocks else np.zeros((projection.n, 0))
    return FeatureMatrix(values, tuple(columns), projection.node_ids, spec.scaling)
