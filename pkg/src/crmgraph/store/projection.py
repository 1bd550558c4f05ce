"""Undirected sales-node projection used by the graph features and the GCN."""

import csv
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from ..errors import (
    DisconnectedGraph,
    EmptyRecords,
    InvalidProjection,
    MissingTrainFlag,
    NoEdges,
    NoLabeledPair,
    UnknownNodeInEdge,
)
from .records import LOST, WON

CONNECTIVITY_ATTRIBUTES = ("Up_sale", "Client", "Competitors", "Product", "Seller")

EDGELIST_NAME = "CRM.edgelist"
ATTRIBUTES_NAME = "CRM.attributes"
ATTRIBUTES_HEADER = ("node", "status", "role")


@dataclass(frozen=True)
class GraphProjection:
    """Undirected simple graph over sales ids.

    ``edges`` holds each undirected edge once as ``(i, j)`` with ``i < j``,
    sorted. ``labels`` and ``train_pair`` (indices of the Won and the Lost
    training node) are optional so that bare graphs can be built for the
    feature code; :func:`build_gcn_graph` and :func:`import_edgelist`
    always set them and additionally guarantee connectivity.
    """

    node_ids: Tuple[str, ...]
    edges: Tuple[Tuple[int, int], ...]
    labels: Optional[Tuple[str, ...]] = None
    train_pair: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        n = len(self.node_ids)
        if len(set(self.node_ids)) != n:
            raise InvalidProjection("node ids are not unique")
        prev = None
        for e in self.edges:
            i, j = e
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidProjection(f"edge {e} references a node outside 0..{n - 1}")
            if i == j:
                raise InvalidProjection(f"self-loop on node {i}")
            if i > j:
                raise InvalidProjection(f"edge {e} not stored with smaller index first")
            if prev is not None and e <= prev:
                raise InvalidProjection("edges must be sorted and unique")
            prev = e
        if self.labels is not None:
            if len(self.labels) != n:
                raise InvalidProjection("one label per node required")
            bad = set(self.labels) - {WON, LOST}
            if bad:
                raise InvalidProjection(f"unknown labels {sorted(bad)}")
        if self.train_pair is not None:
            if self.labels is None:
                raise InvalidProjection("train_pair requires labels")
            won, lost = self.train_pair
            if not (0 <= won < n and 0 <= lost < n):
                raise InvalidProjection("train_pair index out of range")
            if self.labels[won] != WON or self.labels[lost] != LOST:
                raise InvalidProjection("train_pair must be (Won node, Lost node)")

    @classmethod
    def from_edges(cls, n_or_ids, edges, labels=None, train_pair=None):
        """Build from an arbitrary undirected edge iterable (any order, duplicates ok)."""
        if isinstance(n_or_ids, int):
            node_ids = tuple(str(i) for i in range(n_or_ids))
        else:
            node_ids = tuple(n_or_ids)
        canon = sorted({(min(i, j), max(i, j)) for i, j in edges})
        return cls(node_ids, tuple(canon), None if labels is None else tuple(labels), train_pair)

    @property
    def n(self):
        return len(self.node_ids)

    @cached_property
    def neighbors(self):
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def degrees(self):
        return np.array([len(a) for a in self.neighbors], dtype=int)

    def adjacency(self):
        a = np.zeros((self.n, self.n))
        if self.edges:
            idx = np.array(self.edges)
            a[idx[:, 0], idx[:, 1]] = 1.0
            a[idx[:, 1], idx[:, 0]] = 1.0
        return a

    def bfs_distances(self, source):
        """Hop counts from ``source``; unreachable nodes get -1."""
        dist = np.full(self.n, -1, dtype=int)
        dist[source] = 0
        queue = deque([source])
        nbrs = self.neighbors
        while queue:
            v = queue.popleft()
            for u in nbrs[v]:
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        return dist

    def components(self):
        """Connected components as sorted index lists, ordered by smallest member."""
        seen = np.zeros(self.n, dtype=bool)
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            members = np.flatnonzero(self.bfs_distances(s) >= 0)
            seen[members] = True
            comps.append(members.tolist())
        return comps

    def is_connected(self):
        return self.n > 0 and bool(np.all(self.bfs_distances(0) >= 0))

    def index_of(self, node_id):
        try:
            return self._index[node_id]
        except KeyError:
            raise KeyError(f"unknown node {node_id!r}") from None

    @cached_property
    def _index(self):
        return {nid: i for i, nid in enumerate(self.node_ids)}

    def class_vector(self):
        """1 for Won, 0 for Lost, in node order."""
        if self.labels is None:
            raise InvalidProjection("projection has no labels")
        return np.array([1 if lab == WON else 0 for lab in self.labels], dtype=int)

    def require_train_pair(self):
        if self.train_pair is None:
            raise InvalidProjection("projection has no train pair")
        return self.train_pair

    def test_indices(self):
        won, lost = self.require_train_pair()
        return np.array([i for i in range(self.n) if i not in (won, lost)], dtype=int)

    def permuted(self, order):
        """Same graph with node ``order[k]`` moved to position ``k``."""
        order = list(order)
        if sorted(order) != list(range(self.n)):
            raise ValueError("order must be a permutation of node indices")
        new_pos = {old: new for new, old in enumerate(order)}
        edges = [(new_pos[i], new_pos[j]) for i, j in self.edges]
        labels = None if self.labels is None else [self.labels[o] for o in order]
        pair = None
        if self.train_pair is not None:
            pair = (new_pos[self.train_pair[0]], new_pos[self.train_pair[1]])
        return GraphProjection.from_edges([self.node_ids[o] for o in order], edges, labels, pair)

    def validate_connected(self):
        if not self.is_connected():
            raise DisconnectedGraph(
                f"projection has {len(self.components())} connected components"
            )
        return self


@dataclass(frozen=True)
class ProjectionRule:
    """Edge rule: connect two sales that agree on at least ``k`` attributes.

    ``train_ids`` optionally pins the ``(won_id, lost_id)`` training pair;
    otherwise the first Won and first Lost node (in record order) of the
    retained component are used.
    """

    k: int = 4
    attributes: Tuple[str, ...] = CONNECTIVITY_ATTRIBUTES
    train_ids: Optional[Tuple[str, str]] = None

    def __post_init__(self):
        if not 1 <= self.k <= len(self.attributes):
            raise ValueError(f"k must lie in 1..{len(self.attributes)}, got {self.k}")


def match_counts(records, attributes=CONNECTIVITY_ATTRIBUTES):
    """N x N matrix of how many ``attributes`` each pair of records shares."""
    n = len(records)
    counts = np.zeros((n, n), dtype=int)
    for col in attributes:
        _, codes = np.unique([r[col] for r in records], return_inverse=True)
        counts += codes[:, None] == codes[None, :]
    return counts


def _largest_component(proj):
    comps = proj.components()
    # ties go to the component holding the earliest record
    return max(comps, key=lambda c: (len(c), -c[0]))


def build_gcn_graph(records, rule=None):
    rule = rule or ProjectionRule()
    if not records:
        raise EmptyRecords("cannot project zero records")
    counts = match_counts(records, rule.attributes)
    ii, jj = np.nonzero(np.triu(counts >= rule.k, k=1))
    if len(ii) == 0:
        raise NoEdges(f"no pair of records shares >= {rule.k} of {list(rule.attributes)}")
    full = GraphProjection.from_edges(
        [r.sales_enquiry_id for r in records],
        zip(ii.tolist(), jj.tolist()),
        [r.status for r in records],
    )
    keep = _largest_component(full)
    new_pos = {old: new for new, old in enumerate(keep)}
    edges = [(new_pos[i], new_pos[j]) for i, j in full.edges if i in new_pos]
    node_ids = [full.node_ids[k] for k in keep]
    labels = [full.labels[k] for k in keep]

    if rule.train_ids is not None:
        won_id, lost_id = rule.train_ids
        idx = {nid: p for p, nid in enumerate(node_ids)}
        if won_id not in idx or lost_id not in idx:
            raise NoLabeledPair(f"train ids {rule.train_ids} not in the retained component")
        pair = (idx[won_id], idx[lost_id])
        if labels[pair[0]] != WON or labels[pair[1]] != LOST:
            raise NoLabeledPair(f"train ids {rule.train_ids} do not have labels (Won, Lost)")
    else:
        try:
            pair = (labels.index(WON), labels.index(LOST))
        except ValueError:
            raise NoLabeledPair("largest component lacks one of the two classes") from None
    return GraphProjection.from_edges(node_ids, edges, labels, pair)


def export_projection(projection, directory, stem="CRM"):
    """Write ``<stem>.edgelist`` and ``<stem>.attributes``; return both paths."""
    projection.require_train_pair()
    for nid in projection.node_ids:
        if not nid or any(ch.isspace() for ch in nid) or "," in nid:
            raise InvalidProjection(f"node id {nid!r} cannot be written to an edgelist")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    edge_path = directory / f"{stem}.edgelist"
    attr_path = directory / f"{stem}.attributes"
    ids = projection.node_ids
    with edge_path.open("w", encoding="utf-8", newline="\n") as fh:
        for i, j in projection.edges:
            fh.write(f"{ids[i]} {ids[j]}\n")
    train = set(projection.train_pair)
    with attr_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ATTRIBUTES_HEADER)
        for k, nid in enumerate(ids):
            writer.writerow([nid, projection.labels[k], "train" if k in train else "test"])
    return edge_path, attr_path


def import_edgelist(edgelist_path, attributes_path):
    """Rebuild a projection from an edgelist plus attributes file.

    Node order follows the attributes file. Each undirected edge may appear
    in either orientation; repeated edges collapse into one.
    """
    node_ids, labels, roles = [], [], []
    with Path(attributes_path).open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != ATTRIBUTES_HEADER:
            raise InvalidProjection(f"attributes header must be {','.join(ATTRIBUTES_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise InvalidProjection(f"attributes line {lineno}: expected 3 fields")
            nid, status, role = (c.strip() for c in row)
            if status not in (WON, LOST):
                raise InvalidProjection(f"attributes line {lineno}: bad status {status!r}")
            if role not in ("train", "test"):
                raise InvalidProjection(f"attributes line {lineno}: bad role {role!r}")
            node_ids.append(nid)
            labels.append(status)
            roles.append(role)
    index = {nid: k for k, nid in enumerate(node_ids)}
    if len(index) != len(node_ids):
        raise InvalidProjection("duplicate node in attributes file")

    train = {WON: [], LOST: []}
    for k, role in enumerate(roles):
        if role == "train":
            train[labels[k]].append(k)
    if len(train[WON]) != 1 or len(train[LOST]) != 1:
        raise MissingTrainFlag(
            f"need exactly one train node per class, found Won={len(train[WON])} Lost={len(train[LOST])}"
        )

    edges = []
    with Path(edgelist_path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise InvalidProjection(f"edgelist line {lineno}: expected 'SRC DST'")
            for p in parts:
                if p not in index:
                    raise UnknownNodeInEdge(f"edgelist line {lineno}: unknown node {p!r}")
            a, b = index[parts[0]], index[parts[1]]
            if a == b:
                raise InvalidProjection(f"edgelist line {lineno}: self-loop on {parts[0]!r}")
            edges.append((a, b))

    proj = GraphProjection.from_edges(node_ids, edges, labels, (train[WON][0], train[LOST][0]))
    return proj.validate_connected()
