"""Brute-force reference implementations, written independently of the library."""

import itertools
import math

import numpy as np


def dense_adjacency(n, edges):
    a = np.zeros((n, n))
    for i, j in edges:
        a[i, j] = a[j, i] = 1.0
    return a


def pagerank_dense(a, damping=0.85, iters=5000):
    """Power iteration on the explicit Google matrix."""
    n = a.shape[0]
    out = a.sum(axis=1)
    m = np.zeros((n, n))
    for j in range(n):
        m[:, j] = a[j] / out[j] if out[j] else 1.0 / n
    g = damping * m + (1.0 - damping) / n
    r = np.full(n, 1.0 / n)
    for _ in range(iters):
        nxt = g @ r
        if np.abs(nxt - r).sum() < 1e-15:
            return nxt
        r = nxt
    return r


def floyd_warshall(a):
    n = a.shape[0]
    d = np.where(a > 0, 1.0, np.inf)
    np.fill_diagonal(d, 0.0)
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def closeness_fw(a):
    d = floyd_warshall(a)
    n = a.shape[0]
    if n < 2:
        return np.zeros(n)
    return (n - 1) / d.sum(axis=1)


def clustering_triangles(a):
    n = a.shape[0]
    tri = np.zeros(n)
    for i, j, k in itertools.combinations(range(n), 3):
        if a[i, j] and a[j, k] and a[i, k]:
            tri[[i, j, k]] += 1
    deg = a.sum(axis=1)
    out = np.zeros(n)
    ok = deg >= 2
    out[ok] = 2 * tri[ok] / (deg[ok] * (deg[ok] - 1))
    return out


def eigenvector_eigh(a):
    vals, vecs = np.linalg.eigh(a)
    v = vecs[:, np.argmax(vals)]
    v = v * np.sign(v.sum())
    return v / np.linalg.norm(v)


def auc_pairs(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    credit = 0.0
    for p in pos:
        for q in neg:
            credit += 1.0 if p > q else 0.5 if p == q else 0.0
    return credit / (len(pos) * len(neg))


def gcn_probabilities(weights, head_w, head_b, a_norm, x):
    """Straight-line forward pass, one explicit matrix product at a time."""
    h = np.array(x, dtype=float)
    for w in weights:
        h = np.maximum(np.matmul(a_norm, np.matmul(h, w)), 0.0)
    z = np.matmul(h, head_w) + head_b
    return np.array([1.0 / (1.0 + math.exp(-v)) for v in z])


def central_differences(f, params, step=1e-5):
    """Numerical gradient of scalar ``f(params)`` for a list of arrays."""
    grads = []
    for k, p in enumerate(params):
        g = np.zeros_like(p, dtype=float)
        for idx in np.ndindex(p.shape):
            plus = [q.copy() for q in params]
            minus = [q.copy() for q in params]
            plus[k][idx] += step
            minus[k][idx] -= step
            g[idx] = (f(plus) - f(minus)) / (2 * step)
        grads.append(g)
    return grads


def relative_error(analytic, numeric):
    a = np.concatenate([np.ravel(g) for g in analytic])
    b = np.concatenate([np.ravel(g) for g in numeric])
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / scale)


def best_stump(x, y):
    """Exhaustive single-split classifier minimizing weighted Gini, ties to the lowest feature."""
    def gini(lab):
        if lab.size == 0:
            return 0.0
        p = lab.mean()
        return 1.0 - p * p - (1 - p) * (1 - p)

    best = None
    for f in range(x.shape[1]):
        mask = x[:, f] == 1
        if mask.all() or not mask.any():
            continue
        score = (mask.sum() * gini(y[mask]) + (~mask).sum() * gini(y[~mask])) / y.size
        if best is None or score < best[0] - 1e-15:
            best = (score, f)
    return None if best is None else best[1]
