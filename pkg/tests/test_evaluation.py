import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crmgraph import evaluation, gcn
from crmgraph.errors import ConfigError, NonFiniteLoss, ReportError, SingleClass, TooFewSamples
from crmgraph.evaluation import (
    ConfusionMatrix,
    SuiteConfig,
    evaluate_gcn,
    metrics,
    render_report,
    roc_auc,
    run_experiment_suite,
    split_train_test,
    write_predictions_csv,
)
from crmgraph.metrics import LADDER

import oracles
from conftest import make_record, two_clique


def clique_records(proj):
    return [make_record(nid, lab, Product=f"p{k % 3}", Seller=lab)
            for k, (nid, lab) in enumerate(zip(proj.node_ids, proj.labels))]


FAST = SuiteConfig(train=gcn.TrainConfig(epochs=200))


# split

def test_split_examples():
    tr, te = split_train_test([1] * 5 + [0] * 5, 0.8)
    labels = np.array([1] * 5 + [0] * 5)
    assert (tr.size, te.size) == (8, 2)
    assert labels[tr].sum() == 4 and labels[te].sum() == 1
    with pytest.raises(ConfigError):
        split_train_test(labels, 1.0)
    with pytest.raises(TooFewSamples):
        split_train_test([1, 0, 0], 0.5)


def test_split_448():
    labels = np.array([1] * 227 + [0] * 221)
    tr, te = split_train_test(labels)
    assert (tr.size, te.size) == (358, 90)
    assert abs(labels[tr].sum() - 227 * 0.8) <= 1 and abs((1 - labels[tr]).sum() - 221 * 0.8) <= 1
    assert np.intersect1d(tr, te).size == 0 and np.union1d(tr, te).size == 448


@given(st.integers(2, 40), st.integers(2, 40), st.integers(0, 2**31), st.floats(0.1, 0.9))
def test_split_determinism_and_balance(n_pos, n_neg, seed, ratio):
    labels = np.array([1] * n_pos + [0] * n_neg)
    a = split_train_test(labels, ratio, seed)
    b = split_train_test(labels, ratio, seed)
    assert all(np.array_equal(p, q) for p, q in zip(a, b))
    tr, te = a
    assert np.union1d(tr, te).size == labels.size
    for cls, count in ((1, n_pos), (0, n_neg)):
        share = int((labels[tr] == cls).sum())
        assert 1 <= share <= count - 1
        assert abs(share - count * tr.size / labels.size) < 1


# metrics

def test_metric_examples():
    m = metrics(ConfusionMatrix(tp=86, fp=0, tn=100, fn=14))
    assert (m.precision, m.sensitivity, m.specificity, m.accuracy) == (1.0, 0.86, 1.0, 0.93)
    m = metrics(ConfusionMatrix(tp=0, fp=0, tn=10, fn=0))
    assert (m.precision, m.sensitivity, m.specificity, m.accuracy, m.f1) == (0, 0, 1, 1, 0)
    m = metrics(ConfusionMatrix(1, 1, 1, 1))
    assert {m.accuracy, m.precision, m.sensitivity, m.specificity, m.f1} == {0.5}


def test_rates_scaled_from_reported_matrix():
    cm = ConfusionMatrix(tp=86, fp=0, tn=100, fn=14)
    assert cm.rates() == {"tnr": 1.0, "fpr": 0.0, "fnr": 0.14, "tpr": 0.86}


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_metric_bounds_and_identities(tp, fp, tn, fn):
    if tp + fp + tn + fn == 0:
        return
    cm = ConfusionMatrix(tp, fp, tn, fn)
    m = metrics(cm)
    values = [m.accuracy, m.precision, m.sensitivity, m.specificity, m.f1]
    assert all(0 <= v <= 1 for v in values)
    pos, neg = tp + fn, tn + fp
    assert m.accuracy == pytest.approx((m.sensitivity * pos + m.specificity * neg) / (pos + neg))
    if m.precision + m.sensitivity > 0:
        assert m.f1 == pytest.approx(2 * m.precision * m.sensitivity / (m.precision + m.sensitivity))
    assert cm.total == tp + fp + tn + fn


def test_confusion_from_predictions():
    cm = ConfusionMatrix.from_predictions([1, 1, 0, 0, 1], [1, 0, 0, 1, 1])
    assert (cm.tp, cm.fp, cm.tn, cm.fn) == (2, 1, 1, 1)


# ROC / AUC

def test_auc_examples():
    assert roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]).auc == 1.0
    assert roc_auc([0.3] * 6, [1, 0, 1, 0, 1, 0]).auc == 0.5
    scores, labels = [0.9, 0.4, 0.4, 0.7, 0.1, 0.4], [1, 0, 1, 0, 1, 0]
    assert roc_auc(scores, labels).auc == oracles.auc_pairs(scores, labels)
    with pytest.raises(SingleClass):
        roc_auc([0.1, 0.2], [1, 1])


scores_labels = st.integers(2, 30).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 6).map(lambda k: k / 6), min_size=n, max_size=n),
    st.lists(st.integers(0, 1), min_size=n, max_size=n),
)).filter(lambda t: 0 < sum(t[1]) < len(t[1]))


@given(scores_labels)
def test_roc_curve_properties(data):
    scores, labels = data
    roc = roc_auc(scores, labels)
    assert np.all(np.diff(roc.fpr) >= 0) and np.all(np.diff(roc.tpr) >= 0)
    assert (roc.fpr[0], roc.tpr[0], roc.fpr[-1], roc.tpr[-1]) == (0, 0, 1, 1)
    assert abs(roc.auc - roc.trapezoid_area()) <= 1e-12
    assert roc.auc == oracles.auc_pairs(scores, labels)


@given(scores_labels)
def test_auc_invariant_under_monotone_map(data):
    scores, labels = data
    base = roc_auc(scores, labels).auc
    assert roc_auc(np.exp(3 * np.asarray(scores)) - 7, labels).auc == base


# GCN evaluation

def test_evaluate_gcn_examples(clique_pair):
    y = clique_pair.class_vector().astype(float)
    perfect = evaluate_gcn(clique_pair, np.where(y == 1, 0.9, 0.1))
    assert perfect.metrics.accuracy == 1.0 and perfect.roc.auc == 1.0
    assert perfect.confusion.total == 8 and perfect.regime == "transductive"
    assert "n0" not in perfect.ids and "n9" not in perfect.ids
    all_lost = evaluate_gcn(clique_pair, np.full(10, 0.2))
    assert all_lost.metrics.sensitivity == 0.0 and all_lost.metrics.specificity == 1.0


# suite

def test_default_suite_shape(clique_pair):
    reports = run_experiment_suite(clique_pair, clique_records(clique_pair), FAST)
    names = [r.model for r in reports]
    assert len(reports) == 14 and all(r.ok for r in reports)
    assert names[:6] == ["GCN-PageRank", "GCN-Identity", "GCN-Closeness", "GCN-Cluster",
                         "GCN-Eigenvector", "GCN-ShortestPath"]
    assert names[6:12] == [f"GCN-{r}" for r in LADDER] and names[12:] == ["RF", "ANN"]
    sp = reports[5]
    assert sp.metrics.accuracy == 1.0
    assert {r.regime for r in reports[12:]} == {"holdout"}
    assert reports[12].config["n_train"] == 8


def test_failed_cell_is_recorded(clique_pair, monkeypatch):
    real = gcn.train
    calls = {"n": 0}

    def flaky(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] == 3:
            raise NonFiniteLoss(17)
        return real(*args, **kwargs)

    monkeypatch.setattr(evaluation.gcn, "train", flaky)
    reports = run_experiment_suite(clique_pair, clique_records(clique_pair), FAST)
    failed = [r for r in reports if not r.ok]
    assert len(reports) == 14 and len(failed) == 1
    assert failed[0].model == "GCN-Closeness" and "epoch 17" in failed[0].error
    assert failed[0].to_dict()["error"].startswith("NonFiniteLoss")


def test_convergence_failure_hits_every_cell_using_the_feature(clique_pair):
    cfg = SuiteConfig(train=gcn.TrainConfig(epochs=50), baselines=False,
                      feature_options={"Eigenvector": {"max_iter": 1}})
    reports = run_experiment_suite(clique_pair, clique_records(clique_pair), cfg)
    assert [r.model for r in reports if not r.ok] == ["GCN-Eigenvector", "GCN-5F", "GCN-6F"]
    assert all("NotConverged" in r.error for r in reports if not r.ok)


def test_render_report(tmp_path, clique_pair):
    reports = run_experiment_suite(clique_pair, clique_records(clique_pair),
                                   SuiteConfig(train=gcn.TrainConfig(epochs=50), singles=("ShortestPath",),
                                               ladder=(), baselines=False))
    data, plot = render_report(reports, tmp_path / "out")
    doc = json.loads(data.read_text())
    (rep,) = doc["reports"]
    assert set(rep) >= {"model", "features", "regime", "counts", "rates", "metrics", "config"}
    assert set(rep["metrics"]) == {"accuracy", "precision", "sensitivity", "specificity", "f1", "auc"}
    assert rep["config"]["seed"] == 42
    svg = plot.read_text()
    assert svg.lstrip().startswith("<?xml") and 'width="800pt"' in svg and 'height="600pt"' in svg
    assert "GCN-ShortestPath" in svg
    first = (data.read_bytes(), plot.read_bytes())
    render_report(reports, tmp_path / "out")
    assert (data.read_bytes(), plot.read_bytes()) == first
    with pytest.raises(ReportError):
        render_report([], tmp_path)


def test_predictions_csv(tmp_path, clique_pair):
    rep = evaluate_gcn(clique_pair, np.linspace(0.05, 0.95, 10))
    lines = write_predictions_csv(rep, tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "node_or_row_id,score,class" and len(lines) == 9
    assert lines[1].startswith("n1,") and lines[-1].endswith(",Won")


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=10, max_size=10))
def test_report_rates_derive_from_counts(probs):
    clique_pair = two_clique()
    rep = evaluate_gcn(clique_pair, np.array(probs))
    c = rep.confusion
    d = rep.to_dict()
    assert d["rates"]["tpr"] == (c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0)
    assert d["metrics"]["sensitivity"] == d["rates"]["tpr"]
    assert d["metrics"]["specificity"] == d["rates"]["tnr"]
