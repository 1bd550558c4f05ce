import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crmgraph.baselines import (
    ForestConfig,
    MlpConfig,
    one_hot_encode,
    predict_forest,
    predict_mlp,
    train_mlp,
    train_random_forest,
)
from crmgraph.baselines import mlp as mlp_mod
from crmgraph.errors import ConfigError, DegenerateLabels, DimensionMismatch, EmptyRecords
from crmgraph.store import ATTRIBUTE_COLUMNS, ID_COLUMN, LOST, STATUS_COLUMN, WON
from crmgraph.synthetic import VOCABULARY, synthetic_records

import oracles
from conftest import make_record

ONLY_PRODUCT = frozenset(set(ATTRIBUTE_COLUMNS) - {"Product"} | {ID_COLUMN, STATUS_COLUMN})


# encoding

def test_two_values_one_column():
    enc, y = one_hot_encode([make_record("a", WON, Product="a"), make_record("b", LOST, Product="b")],
                            excluded=ONLY_PRODUCT)
    assert enc.matrix.tolist() == [[1, 0], [0, 1]]
    assert enc.columns == (("Product", "a"), ("Product", "b"))
    assert y.tolist() == [1, 0]


def test_single_category_column():
    enc, _ = one_hot_encode([make_record("a"), make_record("b")], excluded=ONLY_PRODUCT)
    assert enc.matrix.tolist() == [[1], [1]]


def test_column_order_and_width():
    recs = synthetic_records()
    enc, y = one_hot_encode(recs)
    assert enc.n_features == sum(len(v) for v in enc.categories.values())
    assert [c for c, _ in enc.columns] == sorted([c for c, _ in enc.columns], key=ATTRIBUTE_COLUMNS.index)
    for col in ATTRIBUTE_COLUMNS:
        cats = [v for c, v in enc.columns if c == col]
        assert cats == sorted(cats)
        block = enc.matrix[:, [k for k, (c, _) in enumerate(enc.columns) if c == col]]
        assert np.all(block.sum(axis=1) == 1)
    assert enc.n_features == sum(len(v) for v in VOCABULARY.values()) == 95
    assert y.sum() == 227
    with pytest.raises(EmptyRecords):
        one_hot_encode([])


def test_round_trip_and_transform():
    recs = synthetic_records(n=50, n_won=25)
    enc, _ = one_hot_encode(recs)
    for rec, row in zip(recs, enc.matrix):
        assert enc.decode(row) == dict(rec.attributes)
    assert np.array_equal(enc.transform(recs), enc.matrix)


# forest

def separable(seed, n=40, noise=6):
    rng = np.random.default_rng(seed)
    y = np.array([0, 1] * (n // 2))
    rng.shuffle(y)
    x = rng.integers(0, 2, size=(n, noise + 1))
    x[:, 3] = y
    return x, y


def test_perfect_feature_fits_training_data():
    x, y = separable(1)
    model = train_random_forest(x, y, ForestConfig(n_trees=20))
    classes, _ = predict_forest(model, x)
    assert np.array_equal(classes, y)


def test_single_class_rejected():
    with pytest.raises(DegenerateLabels):
        train_random_forest(np.eye(3, dtype=int), np.ones(3, dtype=int))
    with pytest.raises(ConfigError):
        train_random_forest(np.full((2, 2), 0.5), np.array([0, 1]))


@pytest.mark.parametrize("seed", range(4))
def test_oob_matches_stump_oracle(seed):
    x, y = separable(seed)
    model = train_random_forest(x, y, ForestConfig(n_trees=25, max_features=x.shape[1], seed=seed))
    f = oracles.best_stump(x, y)
    stump_pred = x[:, f]
    for tree in model.trees:
        assert tree.depth == 1 and tree.used_features() == [f]
    seen = ~np.isnan(model.oob_score)
    assert seen.sum() > 30
    oob_class = (model.oob_score[seen] > 0.5).astype(int)
    assert np.array_equal(oob_class, stump_pred[seen])


def test_tree_and_score_invariants():
    recs = synthetic_records(n=80, n_won=40)
    enc, y = one_hot_encode(recs)
    model = train_random_forest(enc.matrix, y, ForestConfig(n_trees=15))
    assert model.max_features == int(np.sqrt(enc.n_features))
    for tree in model.trees:
        leaves = [k for k, f in enumerate(tree.feature) if f == -1]
        assert all(tree.value[k] in (0, 1) for k in leaves)
        assert all(0 <= f < enc.n_features for f in tree.used_features())
    _, scores = predict_forest(model, enc.matrix)
    steps = scores * model.n_trees
    assert np.all((0 <= scores) & (scores <= 1)) and np.allclose(steps, np.round(steps))


def test_forest_determinism():
    x, y = separable(5)
    a = train_random_forest(x, y, ForestConfig(n_trees=10, seed=3))
    b = train_random_forest(x, y, ForestConfig(n_trees=10, seed=3))
    assert a.to_json() == b.to_json()


def test_identical_trees_give_binary_scores():
    x, y = separable(2)
    model = train_random_forest(x, y, ForestConfig(n_trees=7))
    model.trees = [model.trees[0]] * 7
    _, scores = predict_forest(model, x)
    assert set(np.unique(scores)) <= {0.0, 1.0}


def test_even_vote_split_goes_to_lost():
    x = np.array([[0, 1], [1, 0]] * 4)
    y = x[:, 0].copy()
    model = train_random_forest(x, y, ForestConfig(n_trees=2, max_features=2))
    flipped = train_random_forest(x, 1 - y, ForestConfig(n_trees=2, max_features=2))
    model.trees = [model.trees[0], flipped.trees[0]]
    classes, scores = predict_forest(model, x)
    assert np.all(scores == 0.5) and np.all(classes == 0)


def test_irrelevant_feature_perturbation():
    x, y = separable(7, noise=40)
    model = train_random_forest(x, y, ForestConfig(n_trees=5))
    used = set().union(*(t.used_features() for t in model.trees))
    unused = [f for f in range(x.shape[1]) if f not in used]
    assert unused
    x2 = x.copy()
    x2[:, unused[0]] ^= 1
    assert np.array_equal(predict_forest(model, x)[1], predict_forest(model, x2)[1])


def test_forest_dimension_check():
    x, y = separable(0)
    model = train_random_forest(x, y, ForestConfig(n_trees=2))
    with pytest.raises(DimensionMismatch):
        predict_forest(model, x[:, :3])


# mlp

def toy_separable():
    """20 points on either side of the line x0 + x1 = 0, kept at distance > 0.5."""
    rng = np.random.default_rng(0)
    pos, neg = [], []
    while len(pos) < 10 or len(neg) < 10:
        p = rng.uniform(-2, 2, size=2)
        side = p.sum() / np.sqrt(2)
        if side > 0.5 and len(pos) < 10:
            pos.append(p)
        elif side < -0.5 and len(neg) < 10:
            neg.append(p)
    return np.array(pos + neg), np.array([1] * 10 + [0] * 10)


def test_mlp_separable_toy():
    x, y = toy_separable()
    model = train_mlp(x, y)
    classes, scores = predict_mlp(model, x)
    assert np.array_equal(classes, y)
    assert model.losses[-1] < model.losses[0]
    assert model.dims == (2, 64, 32, 1)


def test_mlp_config_validation():
    with pytest.raises(ConfigError):
        MlpConfig(epochs=0)
    with pytest.raises(ConfigError):
        MlpConfig(lr=-1)


def mlp_gradient_error(seed, n=5):
    rng = np.random.default_rng(seed)
    f = int(rng.integers(2, 5))
    x = rng.normal(size=(n, f))
    y = rng.integers(0, 2, size=n).astype(float)
    model = mlp_mod.init_mlp(f, MlpConfig(hidden=(5, 3), seed=seed))
    ws, bs = model.weights, [rng.normal(scale=0.1, size=b.shape) for b in model.biases]
    _, d_ws, d_bs = mlp_mod.loss_and_gradients(ws, bs, x, y)
    k = len(ws)

    def f_(params):
        return mlp_mod.loss_and_gradients(params[:k], params[k:], x, y)[0]

    numeric = oracles.central_differences(f_, ws + bs)
    return oracles.relative_error(d_ws + d_bs, numeric)


@pytest.mark.parametrize("seed", range(5))
def test_mlp_gradients(seed):
    assert mlp_gradient_error(seed) < 1e-4


def test_mlp_determinism():
    x, y = toy_separable()
    a = train_mlp(x, y, MlpConfig(epochs=20))
    b = train_mlp(x, y, MlpConfig(epochs=20))
    assert all(np.array_equal(p, q) for p, q in zip(a.weights, b.weights))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from("xy")), min_size=1, max_size=15))
def test_encoding_recovers_records(rows):
    recs = [make_record(f"r{i}", WON if i % 2 else LOST, Product=p, Seller=s) for i, (p, s) in enumerate(rows)]
    enc, _ = one_hot_encode(recs)
    for rec, row in zip(recs, enc.matrix):
        assert enc.decode(row) == dict(rec.attributes)
