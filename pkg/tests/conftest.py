import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from crmgraph.store import ATTRIBUTE_COLUMNS, LOST, WON, GraphProjection, SalesRecord


def make_record(sid, status=WON, **attrs):
    """Record with every attribute set to "x" unless overridden."""
    values = {c: "x" for c in ATTRIBUTE_COLUMNS}
    values.update(attrs)
    return SalesRecord(sid, values, status)


def two_clique():
    """Two 5-cliques (Won 0..4, Lost 5..9) joined by the bridge 4-5."""
    edges = [(i, j) for block in (range(5), range(5, 10)) for i in block for j in block if i < j]
    edges.append((4, 5))
    labels = [WON] * 5 + [LOST] * 5
    return GraphProjection.from_edges([f"n{i}" for i in range(10)], edges, labels, (0, 9))


def triangle():
    return GraphProjection.from_edges(["a", "b", "c"], [(0, 1), (1, 2), (0, 2)],
                                      [WON, LOST, WON], (0, 1))


def path_wxl():
    """Path W - x - L with W and L as the training pair."""
    return GraphProjection.from_edges(["W", "x", "L"], [(0, 1), (1, 2)], [WON, WON, LOST], (0, 2))


@pytest.fixture
def clique_pair():
    return two_clique()


@st.composite
def connected_graphs(draw, min_nodes=1, max_nodes=8, labeled=False):
    """Random connected graph: a random spanning tree plus extra edges."""
    n = draw(st.integers(min_nodes, max_nodes))
    edges = {(draw(st.integers(0, i - 1)), i) for i in range(1, n)}
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if pairs:
        edges |= set(draw(st.lists(st.sampled_from(pairs), max_size=len(pairs))))
    if not labeled:
        return GraphProjection.from_edges(n, edges)
    won = draw(st.integers(0, n - 1))
    lost = draw(st.integers(0, n - 1).filter(lambda k: k != won))
    labels = [draw(st.sampled_from([WON, LOST])) for _ in range(n)]
    labels[won], labels[lost] = WON, LOST
    return GraphProjection.from_edges(n, edges, labels, (won, lost))


def random_connected(rng, n, p=0.4):
    edges = {(int(rng.integers(0, i)), i) for i in range(1, n)}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.add((i, j))
    return GraphProjection.from_edges(n, edges)


def labeled(proj, won=0, lost=None):
    lost = proj.n - 1 if lost is None else lost
    labels = [WON if k % 2 == 0 else LOST for k in range(proj.n)]
    labels[won], labels[lost] = WON, LOST
    return GraphProjection(proj.node_ids, proj.edges, tuple(labels), (won, lost))


def permutations(rng, n, count=3):
    return [rng.permutation(n) for _ in range(count)]


def assert_close(a, b, tol):
    np.testing.assert_allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=0, atol=tol)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
