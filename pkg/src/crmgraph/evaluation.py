"""Train/test protocol, binary classification metrics, ROC/AUC and the experiment suite."""

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import gcn
from .baselines import (
    ForestConfig,
    MlpConfig,
    one_hot_encode,
    predict_forest,
    predict_mlp,
    train_mlp,
    train_random_forest,
)
from .errors import ConfigError, CrmGraphError, InvalidProjection, ReportError, SingleClass, TooFewSamples
from .metrics import FEATURES, LADDER, FeatureSpec, assemble_features
from .store.inventory import inventory

TRANSDUCTIVE = "transductive"
HOLDOUT = "holdout"


def split_train_test(labels, ratio=0.8, seed=42):
    """Stratified split; returns sorted ``(train, test)`` index arrays.

    The train size is ``floor(ratio * N)``, shared between classes by
    largest remainder so that each class stays within one sample of its
    proportional share. Every class keeps at least one sample on each side.
    """
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"ratio must lie strictly between 0 and 1, got {ratio}")
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    if len(classes) < 2 or counts.min() < 2:
        raise TooFewSamples("each of the two classes needs at least 2 samples")
    n_train = math.floor(ratio * labels.size + 1e-9)
    exact = counts * n_train / labels.size
    share = np.floor(exact).astype(int)
    leftover = n_train - share.sum()
    for k in np.argsort(-(exact - share), kind="stable")[:leftover]:
        share[k] += 1
    share = np.clip(share, 1, counts - 1)

    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls, k in zip(classes, share):
        members = rng.permutation(np.flatnonzero(labels == cls))
        train.extend(members[:k])
        test.extend(members[k:])
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(test, dtype=int))


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with Won (1) as the positive class."""

    tp: int
    fp: int
    tn: int
    fn: int

    @classmethod
    def from_predictions(cls, y_true, y_pred):
        y_true = np.asarray(y_true).astype(int)
        y_pred = np.asarray(y_pred).astype(int)
        return cls(
            tp=int(np.sum((y_true == 1) & (y_pred == 1))),
            fp=int(np.sum((y_true == 0) & (y_pred == 1))),
            tn=int(np.sum((y_true == 0) & (y_pred == 0))),
            fn=int(np.sum((y_true == 1) & (y_pred == 0))),
        )

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    def rates(self):
        """Row-normalized matrix: TNR, FPR over actual negatives; FNR, TPR over actual positives."""
        neg, pos = self.tn + self.fp, self.tp + self.fn
        return {
            "tnr": _ratio(self.tn, neg),
            "fpr": _ratio(self.fp, neg),
            "fnr": _ratio(self.fn, pos),
            "tpr": _ratio(self.tp, pos),
        }


def _ratio(a, b):
    return a / b if b else 0.0


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision: float
    sensitivity: float
    specificity: float
    f1: float


def metrics(cm):
    """Standard rates; any 0/0 evaluates to 0."""
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    sensitivity = _ratio(cm.tp, cm.tp + cm.fn)
    return MetricSet(
        accuracy=_ratio(cm.tp + cm.tn, cm.total),
        precision=precision,
        sensitivity=sensitivity,
        specificity=_ratio(cm.tn, cm.tn + cm.fp),
        f1=_ratio(2 * precision * sensitivity, precision + sensitivity),
    )


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    def trapezoid_area(self):
        return float(np.sum(np.diff(self.fpr) * (self.tpr[1:] + self.tpr[:-1]) / 2.0))


def _average_ranks(x):
    """1-based ranks with ties sharing their mean rank."""
    _, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    return (starts + (counts + 1) / 2.0)[inverse]


def roc_auc(scores, labels):
    """ROC points over every distinct score threshold plus the rank-statistic AUC.

    A sample counts as positive at threshold ``t`` when its score is ``>= t``.
    AUC is the Mann-Whitney statistic with tied pairs credited one half.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(int)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("ROC needs at least one sample of each class")
    ranks = _average_ranks(scores)
    u = float(ranks[labels == 1].sum()) - n_pos * (n_pos + 1) / 2.0
    auc = u / (n_pos * n_neg)

    thresholds = np.unique(scores)[::-1]
    order = np.argsort(-scores, kind="stable")
    s_sorted, y_sorted = scores[order], labels[order]
    tps = np.cumsum(y_sorted)
    fps = np.cumsum(1 - y_sorted)
    # last index of each tied score block
    ends = np.flatnonzero(np.r_[s_sorted[1:] != s_sorted[:-1], True])
    tpr = np.r_[0.0, tps[ends] / n_pos]
    fpr = np.r_[0.0, fps[ends] / n_neg]
    return RocCurve(fpr, tpr, np.r_[np.inf, thresholds], auc)


@dataclass
class EvaluationReport:
    model: str
    features: Optional[List[str]]
    regime: str
    confusion: Optional[ConfusionMatrix] = None
    metrics: Optional[MetricSet] = None
    roc: Optional[RocCurve] = None
    config: Dict = field(default_factory=dict)
    error: Optional[str] = None
    # not serialized; kept for prediction export
    ids: Tuple[str, ...] = ()
    scores: Optional[np.ndarray] = None
    classes: Optional[np.ndarray] = None

    @property
    def ok(self):
        return self.error is None

    def to_dict(self):
        out = {
            "model": self.model,
            "features": self.features,
            "regime": self.regime,
            "config": self.config,
            "error": self.error,
        }
        if self.confusion is not None:
            out["counts"] = asdict(self.confusion)
            out["rates"] = self.confusion.rates()
        if self.metrics is not None:
            m = asdict(self.metrics)
            m["auc"] = None if self.roc is None else self.roc.auc
            out["metrics"] = m
        if self.roc is not None:
            out["roc"] = {"fpr": self.roc.fpr.tolist(), "tpr": self.roc.tpr.tolist()}
        return out


def evaluate_predictions(model, y_true, scores, *, features=None, regime=HOLDOUT, config=None, ids=()):
    y_true = np.asarray(y_true).astype(int)
    scores = np.asarray(scores, dtype=float)
    classes = gcn.classify(scores)
    cm = ConfusionMatrix.from_predictions(y_true, classes)
    try:
        roc = roc_auc(scores, y_true)
    except SingleClass:
        roc = None
    return EvaluationReport(
        model=model,
        features=None if features is None else list(features),
        regime=regime,
        confusion=cm,
        metrics=metrics(cm),
        roc=roc,
        config=dict(config or {}),
        ids=tuple(ids),
        scores=scores,
        classes=classes,
    )


def evaluate_gcn(projection, probabilities, *, model="GCN", features=None, config=None):
    """Score every node except the two training nodes."""
    probabilities = np.asarray(probabilities, dtype=float)
    if probabilities.shape != (projection.n,):
        raise ValueError(f"need one probability per node ({projection.n}), got {probabilities.shape}")
    test = projection.test_indices()
    y = projection.class_vector()
    return evaluate_predictions(
        model,
        y[test],
        probabilities[test],
        features=features,
        regime=TRANSDUCTIVE,
        config=config,
        ids=[projection.node_ids[i] for i in test],
    )


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 42
    train: gcn.TrainConfig = gcn.TrainConfig()
    scaling: bool = True
    split_ratio: float = 0.8
    forest: ForestConfig = ForestConfig()
    mlp: MlpConfig = MlpConfig()
    singles: Tuple[str, ...] = FEATURES
    ladder: Tuple[str, ...] = tuple(LADDER)
    feature_options: Optional[Dict[str, Dict]] = None
    baselines: bool = True


def _check_consistent(projection, records):
    status = {r.sales_enquiry_id: r.status for r in records}
    for nid, lab in zip(projection.node_ids, projection.labels or ()):
        if status.get(nid) != lab:
            raise InvalidProjection(f"projection node {nid!r} does not match the records")


def _gcn_cell(projection, name, spec, cfg, echo):
    train_cfg = replace(cfg.train, seed=cfg.seed)
    x = assemble_features(projection, spec, cfg.feature_options)
    model, outcome = gcn.train(projection, x, train_cfg)
    echo = dict(echo, final_loss=outcome.final_loss, n_columns=x.shape[1])
    return evaluate_gcn(projection, outcome.probabilities, model=name, features=spec.features, config=echo)


def run_experiment_suite(projection, records, config=None):
    """Run every GCN cell (single features, then ladder rungs) and the two baselines.

    A cell that raises a library error yields a report carrying the error
    message instead of metrics; the remaining cells still run.
    """
    cfg = config or SuiteConfig()
    _check_consistent(projection, records)
    stats = inventory(projection)
    won, lost = projection.require_train_pair()
    base_echo = {
        "seed": cfg.seed,
        "projection": {
            "nodes": stats.node_count,
            "edges": stats.relationship_count,
            "mean_degree": stats.degree.mean,
            "train_won": projection.node_ids[won],
            "train_lost": projection.node_ids[lost],
        },
    }
    train_echo = dict(base_echo, **_train_echo(cfg))

    cells = [(f"GCN-{f}", FeatureSpec((f,), cfg.scaling)) for f in cfg.singles]
    cells += [(f"GCN-{r}", FeatureSpec(LADDER[r], cfg.scaling)) for r in cfg.ladder]
    reports = []
    for name, spec in cells:
        try:
            reports.append(_gcn_cell(projection, name, spec, cfg, train_echo))
        except CrmGraphError as exc:
            reports.append(EvaluationReport(name, list(spec.features), TRANSDUCTIVE,
                                            config=train_echo, error=f"{type(exc).__name__}: {exc}"))
    if cfg.baselines:
        reports.extend(_baseline_reports(records, cfg, base_echo))
    return reports


def _train_echo(cfg):
    t = replace(cfg.train, seed=cfg.seed)
    return {
        "gcn": {
            "hidden": list(t.hidden),
            "lr": t.lr,
            "epochs": t.epochs,
            "seed": t.seed,
            "variant": t.variant,
            "init": t.init,
            "frozen_layers": t.frozen_layers,
            "scaling": cfg.scaling,
        },
        "threshold": 0.5,
    }


def _baseline_reports(records, cfg, base_echo):
    out = []
    try:
        enc, y = one_hot_encode(records)
        tr, te = split_train_test(y, cfg.split_ratio, cfg.seed)
    except CrmGraphError as exc:
        msg = f"{type(exc).__name__}: {exc}"
        return [EvaluationReport(m, None, HOLDOUT, config=base_echo, error=msg) for m in ("RF", "ANN")]
    x = enc.matrix
    ids = [records[i].sales_enquiry_id for i in te]
    split_echo = {"split_ratio": cfg.split_ratio, "n_train": int(tr.size), "n_test": int(te.size),
                  "n_features": enc.n_features, "threshold": 0.5}

    forest_cfg = replace(cfg.forest, seed=cfg.seed)
    try:
        forest = train_random_forest(x[tr], y[tr], forest_cfg)
        _, scores = predict_forest(forest, x[te])
        echo = dict(base_echo, **split_echo, forest=asdict(forest_cfg))
        echo["forest"]["max_features"] = forest.max_features
        out.append(evaluate_predictions("RF", y[te], scores, regime=HOLDOUT, config=echo, ids=ids))
    except CrmGraphError as exc:
        out.append(EvaluationReport("RF", None, HOLDOUT, config=base_echo, error=f"{type(exc).__name__}: {exc}"))

    mlp_cfg = replace(cfg.mlp, seed=cfg.seed)
    try:
        mlp = train_mlp(x[tr], y[tr], mlp_cfg)
        _, scores = predict_mlp(mlp, x[te])
        echo = dict(base_echo, **split_echo, mlp=dict(asdict(mlp_cfg), hidden=list(mlp_cfg.hidden)))
        out.append(evaluate_predictions("ANN", y[te], scores, regime=HOLDOUT, config=echo, ids=ids))
    except CrmGraphError as exc:
        out.append(EvaluationReport("ANN", None, HOLDOUT, config=base_echo, error=f"{type(exc).__name__}: {exc}"))
    return out


REPORT_NAME = "report.json"
PLOT_NAME = "roc.svg"


def reports_document(reports):
    return {"reports": [r.to_dict() for r in reports]}


def render_report(reports, directory):
    """Write ``report.json`` and an ROC overlay ``roc.svg``; return both paths."""
    if not reports:
        raise ReportError("no reports to render")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    data_path = directory / REPORT_NAME
    data_path.write_text(json.dumps(reports_document(reports), indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    plot_path = directory / PLOT_NAME
    _plot_roc(reports, plot_path)
    return data_path, plot_path


def _plot_roc(reports, path):
    import matplotlib
    from matplotlib.figure import Figure

    with matplotlib.rc_context({"svg.hashsalt": "crmgraph", "svg.fonttype": "none"}):
        fig = Figure(figsize=(800 / 72, 600 / 72), dpi=72)
        ax = fig.add_subplot()
        ax.plot([0, 1], [0, 1], linestyle="--", color="grey", linewidth=1, label="chance")
        for r in reports:
            if r.roc is None:
                continue
            ax.plot(r.roc.fpr, r.roc.tpr, linewidth=1.5, label=f"{r.model} (AUC {r.roc.auc:.3f})")
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.set_xlabel("False positive rate (1 - specificity)")
        ax.set_ylabel("True positive rate (sensitivity)")
        ax.legend(loc="lower right", fontsize="small")
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def write_predictions_csv(report, path):
    """Per-sample export ``node_or_row_id,score,class``."""
    if report.scores is None:
        raise ReportError(f"report {report.model!r} carries no predictions")
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("node_or_row_id", "score", "class"))
        for rid, s, c in zip(report.ids, report.scores, report.classes):
            writer.writerow((rid, repr(float(s)), "Won" if c else "Lost"))
    return path
