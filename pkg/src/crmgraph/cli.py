"""Command line entry point: ``crmgraph <command> [options]``.

Commands share one output directory. ``ingest`` writes a normalized
``records.csv`` there, ``build --gcn`` writes ``CRM.edgelist`` and
``CRM.attributes``, and later commands pick those up when no explicit
input is given.
"""

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import errors, eda, gcn
from .baselines import one_hot_encode
from .errors import ConfigError, CrmGraphError
from .evaluation import (
    SuiteConfig,
    evaluate_gcn,
    render_report,
    run_experiment_suite,
    write_predictions_csv,
)
from .kvconfig import dump_kv, load_kv
from .metrics import FeatureSpec, assemble_features
from .store import (
    ATTRIBUTES_NAME,
    EDGELIST_NAME,
    LabelMapping,
    ProjectionRule,
    build_eda_graph,
    build_gcn_graph,
    export_projection,
    import_edgelist,
    ingest_csv,
    inventory,
    write_csv,
)
from .synthetic import synthetic_records

RECORDS_NAME = "records.csv"
MODEL_NAME = "model.txt"
TRAIN_STATE_NAME = "train.kv"
MANIFEST_NAME = "manifest.json"

EDA_DEFAULT_ATTRIBUTES = ("Product", "Seller", "Competitors", "Client", "Comp_size", "Up_sale")

EXIT_IO = 3
EXIT_USAGE = 2

_DEFAULTS = {
    "out": "out",
    "seed": 42,
    "k": 4,
    "features": "ShortestPath",
    "lr": None,
    "epochs": None,
    "hidden": None,
    "variant": None,
    "scale": True,
    "frozen_layers": False,
}


def _exit_code_table():
    rows = [("0", "success"), (str(EXIT_USAGE), "usage error"), (str(EXIT_IO), "file system error")]
    seen = set()
    for name in sorted(dir(errors)):
        cls = getattr(errors, name)
        if isinstance(cls, type) and issubclass(cls, CrmGraphError) and cls.exit_code not in seen:
            seen.add(cls.exit_code)
            rows.append((str(cls.exit_code), name))
    rows.sort(key=lambda r: int(r[0]))
    return "exit codes:\n" + "\n".join(f"  {code:>3}  {what}" for code, what in rows)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class Run:
    """Resolved options plus bookkeeping for the manifest."""

    def __init__(self, args):
        cfg = load_kv(args.config) if getattr(args, "config", None) else {}
        self.args = args
        self.opts = {}
        for key, default in _DEFAULTS.items():
            flag = getattr(args, key, None)
            if key == "scale":
                flag = False if getattr(args, "no_scale", False) else None
            if key == "frozen_layers":
                flag = True if getattr(args, "frozen_layers", False) else None
            if flag is not None:
                self.opts[key] = flag
            elif key in cfg:
                self.opts[key] = cfg[key]
            else:
                self.opts[key] = default
        for key in ("input", "edgelist", "attributes", "mapping"):
            self.opts[key] = getattr(args, key, None) or cfg.get(key)
        if getattr(args, "csv", None):
            self.opts["input"] = args.csv
        self.out = Path(self.opts["out"])
        self.out.mkdir(parents=True, exist_ok=True)
        self.inputs = []

    # typed option access

    def seed(self):
        return int(self.opts["seed"])

    def k(self):
        return int(self.opts["k"])

    def scale(self):
        v = self.opts["scale"]
        return v if isinstance(v, bool) else str(v).lower() in ("1", "true", "yes", "on")

    def feature_spec(self, text=None):
        return FeatureSpec.parse(str(text or self.opts["features"]), scaling=self.scale())

    def train_config(self):
        kw = {"seed": self.seed()}
        if self.opts["lr"] is not None:
            kw["lr"] = float(self.opts["lr"])
        if self.opts["epochs"] is not None:
            kw["epochs"] = int(self.opts["epochs"])
        if self.opts["hidden"] is not None:
            kw["hidden"] = _parse_hidden(self.opts["hidden"])
        if self.opts["variant"] is not None:
            kw["variant"] = str(self.opts["variant"])
        frozen = self.opts["frozen_layers"]
        kw["frozen_layers"] = frozen if isinstance(frozen, bool) else str(frozen).lower() in ("1", "true", "yes")
        return gcn.TrainConfig(**kw)

    # inputs

    def _use(self, path):
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"input not found: {path}")
        self.inputs.append(path)
        return path

    def records(self, required=True):
        src = self.opts["input"] or (self.out / RECORDS_NAME)
        if not Path(src).exists() and not required:
            return None
        return ingest_csv(self._use(src))

    def projection(self):
        el, at = self.opts["edgelist"], self.opts["attributes"]
        if el or at:
            if not (el and at):
                raise ConfigError("--edgelist and --attributes must be given together")
            return import_edgelist(self._use(el), self._use(at))
        stored_el, stored_at = self.out / EDGELIST_NAME, self.out / ATTRIBUTES_NAME
        if stored_el.exists() and stored_at.exists() and not self.opts["input"]:
            return import_edgelist(self._use(stored_el), self._use(stored_at))
        return build_gcn_graph(self.records(), ProjectionRule(k=self.k()))

    # outputs

    def record_outputs(self, command, paths):
        manifest_path = self.out / MANIFEST_NAME
        manifest = {"outputs": {}}
        if manifest_path.exists():
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        digests = {str(p): _sha256(p) for p in dict.fromkeys(self.inputs)}
        for p in paths:
            p = Path(p)
            try:
                key = str(p.relative_to(self.out))
            except ValueError:
                key = str(p)
            manifest["outputs"][key] = {
                "command": command,
                "sha256": _sha256(p),
                "inputs": digests,
                "seed": self.seed(),
            }
        manifest["outputs"] = dict(sorted(manifest["outputs"].items()))
        manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _parse_hidden(text):
    if isinstance(text, (tuple, list)):
        return tuple(int(h) for h in text)
    try:
        return tuple(int(h) for h in str(text).replace(" ", "").split(",") if h)
    except ValueError:
        raise ConfigError(f"--hidden expects a comma list of integers, got {text!r}") from None


def _write_json(path, obj):
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


# commands

def cmd_synth(run):
    path = write_csv(synthetic_records(n=run.args.n, seed=run.seed()), run.out / "synthetic.csv")
    run.record_outputs("synth", [path])
    print(f"wrote {path}")


def cmd_ingest(run):
    records = run.records()
    path = write_csv(records, run.out / RECORDS_NAME)
    run.record_outputs("ingest", [path])
    won = sum(r.won for r in records)
    print(f"{len(records)} records, Won={won} Lost={len(records) - won}")


def cmd_build(run):
    if run.args.eda:
        records = run.records()
        mapping = LabelMapping.load(run._use(run.opts["mapping"])) if run.opts["mapping"] else None
        graph = build_eda_graph(records, mapping)
        doc = {
            "nodes": [{"id": n.id, "label": n.label, "key": n.key, "attributes": n.attributes}
                      for n in graph.nodes],
            "edges": [{"source": e.source, "target": e.target, "type": e.type, "properties": e.properties}
                      for e in graph.edges],
        }
        g_path = _write_json(run.out / "eda_graph.json", doc)
        s_path = _write_json(run.out / "eda_inventory.json", inventory(graph).to_dict())
        run.record_outputs("build", [g_path, s_path])
        print(inventory(graph).summary())
    else:
        records = run.records()
        proj = build_gcn_graph(records, ProjectionRule(k=run.k()))
        paths = export_projection(proj, run.out)
        run.record_outputs("build", paths)
        print(inventory(proj).summary())


def cmd_stats(run):
    if run.args.eda:
        path = run._use(run.out / "eda_inventory.json")
        print(json.dumps(json.loads(path.read_text(encoding="utf-8")), indent=2, sort_keys=True))
        return
    stats = inventory(run.projection())
    path = _write_json(run.out / "gcn_inventory.json", stats.to_dict())
    run.record_outputs("stats", [path])
    print(stats.summary())
    print(f"min_degree={stats.degree.min} max_degree={stats.degree.max}")


def cmd_eda(run):
    records = run.records()
    attrs = run.args.attribute or EDA_DEFAULT_ATTRIBUTES
    results = [eda.crosstab(records, a) for a in attrs]
    path = eda.write_crosstabs(results, run.out / "crosstabs.csv")
    counts_path = _write_json(run.out / "label_counts.json", eda.count_by_label(build_eda_graph(records)))
    run.record_outputs("eda", [path, counts_path])
    for res in results:
        print(f"{res.attribute}: " + ", ".join(f"{c} {w}/{l}" for c, w, l in res.rows))


def cmd_features(run):
    proj = run.projection()
    spec = run.feature_spec()
    fm = assemble_features(proj, spec)
    path = fm.to_csv(run.out / "features.csv")
    run.record_outputs("features", [path])
    print(f"features {spec.name}: {fm.shape[0]} x {fm.shape[1]} (scaled={fm.scaled})")


def cmd_train(run):
    proj = run.projection()
    spec = run.feature_spec()
    cfg = run.train_config()
    x = assemble_features(proj, spec)
    model, outcome = gcn.train(proj, x, cfg)
    m_path = model.save(run.out / MODEL_NAME)
    state = {
        "features": ",".join(spec.features),
        "scale": str(spec.scaling).lower(),
        "seed": cfg.seed,
        "variant": cfg.variant,
        "final_loss": repr(outcome.final_loss),
    }
    s_path = run.out / TRAIN_STATE_NAME
    s_path.write_text(dump_kv(state), encoding="utf-8")
    report = evaluate_gcn(proj, outcome.probabilities, model=f"GCN-{spec.name}", features=spec.features)
    p_path = write_predictions_csv(report, run.out / "gcn_predictions.csv")
    run.record_outputs("train", [m_path, s_path, p_path])
    print(f"trained GCN-{spec.name}: final loss {outcome.final_loss:.4f}")


def cmd_evaluate(run):
    proj = run.projection()
    model = gcn.GcnModel.load(run._use(run.out / MODEL_NAME))
    state_path = run.out / TRAIN_STATE_NAME
    state = load_kv(run._use(state_path)) if state_path.exists() else {}
    if run.args.features:
        spec = run.feature_spec(run.args.features)
    else:
        scale = state.get("scale", "true") == "true" and run.scale()
        spec = FeatureSpec.parse(state.get("features", run.opts["features"]), scaling=scale)
    x = assemble_features(proj, spec)
    adj = gcn.normalize_adjacency(proj, model.variant)
    probs, _ = gcn.predict(model, adj, x)
    report = evaluate_gcn(proj, probs, model=f"GCN-{spec.name}", features=spec.features,
                          config={"seed": model.seed, "variant": model.variant})
    paths = render_report([report], run.out)
    run.record_outputs("evaluate", paths)
    m = report.metrics
    print(f"GCN-{spec.name}: accuracy={m.accuracy:.3f} precision={m.precision:.3f} "
          f"sensitivity={m.sensitivity:.3f} specificity={m.specificity:.3f} f1={m.f1:.3f}"
          + (f" auc={report.roc.auc:.3f}" if report.roc else ""))


def cmd_suite(run):
    proj = run.projection()
    records = run.records(required=run.opts["edgelist"] is None)
    cfg = SuiteConfig(seed=run.seed(), train=run.train_config(), scaling=run.scale(),
                      baselines=records is not None)
    reports = run_experiment_suite(proj, records or [], cfg)
    paths = list(render_report(reports, run.out))
    run.record_outputs("suite", paths)
    for r in reports:
        if r.ok:
            auc = f"{r.roc.auc:.3f}" if r.roc else "n/a"
            print(f"{r.model:<20} {r.regime:<12} acc={r.metrics.accuracy:.3f} "
                  f"f1={r.metrics.f1:.3f} auc={auc}")
        else:
            print(f"{r.model:<20} {r.regime:<12} FAILED: {r.error}")


def cmd_export(run):
    dest = Path(run.args.dest) if run.args.dest else run.out / "export"
    proj = run.projection()
    paths = list(export_projection(proj, dest))
    records = run.records(required=False)
    if records:
        enc, y = one_hot_encode(records)
        onehot = dest / "onehot.csv"
        with onehot.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(["sales_enquiry_id"] + enc.column_names() + ["label"]) + "\n")
            for rec, row, lab in zip(records, enc.matrix, y):
                fh.write(",".join([rec.sales_enquiry_id] + [str(int(v)) for v in row] + [str(lab)]) + "\n")
        paths.append(onehot)
    paths.append(assemble_features(proj, run.feature_spec()).to_csv(dest / "features.csv"))
    run.record_outputs("export", paths)
    for p in paths:
        print(p)


COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "build": cmd_build,
    "stats": cmd_stats,
    "eda": cmd_eda,
    "features": cmd_features,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "suite": cmd_suite,
    "export": cmd_export,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="sales CSV (default: <out>/records.csv)")
    common.add_argument("--out", help="output directory (default: out)")
    common.add_argument("--config", help="key = value file; flags take precedence")
    common.add_argument("--seed", type=int, help="master seed (default 42)")
    common.add_argument("--k", type=int, help="attribute matches needed for a projection edge (default 4)")
    common.add_argument("--edgelist", help="import the projection from this edgelist")
    common.add_argument("--attributes", help="attributes file paired with --edgelist")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--features", help='comma list of features or a ladder rung "1F".."6F"')
    model.add_argument("--lr", type=float, help="learning rate")
    model.add_argument("--epochs", type=int, help="training epochs")
    model.add_argument("--hidden", help="hidden layer widths, e.g. 16,8")
    model.add_argument("--variant", choices=gcn.VARIANTS, help="adjacency normalization")
    model.add_argument("--no-scale", action="store_true", help="disable min-max feature scaling")
    model.add_argument("--frozen-layers", action="store_true",
                       help="train only the logistic head on fixed random layers")

    parser = argparse.ArgumentParser(
        prog="crmgraph",
        description="Graph analytics and GCN sales-outcome prediction for B2B CRM data.",
        epilog=_exit_code_table(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic dataset with the same schema")
    p.add_argument("--n", type=int, default=448)
    p = sub.add_parser("ingest", parents=[common], help="validate and normalize a sales CSV")
    p.add_argument("csv", nargs="?", help="same as --input")
    p = sub.add_parser("build", parents=[common], help="build the EDA property graph or the GCN projection")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--eda", action="store_true")
    g.add_argument("--gcn", action="store_true")
    p.add_argument("--mapping", help="label mapping file for --eda")
    p = sub.add_parser("stats", parents=[common], help="inventory statistics")
    p.add_argument("--eda", action="store_true", help="show the EDA graph inventory instead")
    p = sub.add_parser("eda", parents=[common], help="status crosstabs per attribute")
    p.add_argument("attribute", nargs="*")
    sub.add_parser("features", parents=[common, model], help="write the feature matrix")
    sub.add_parser("train", parents=[common, model], help="train the GCN")
    sub.add_parser("evaluate", parents=[common, model], help="evaluate the trained GCN")
    sub.add_parser("suite", parents=[common, model], help="run all GCN feature cells and baselines")
    p = sub.add_parser("export", parents=[common, model], help="export projection, one-hot and feature files")
    p.add_argument("--dest", help="destination directory (default: <out>/export)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run = Run(args)
        COMMANDS[args.command](run)
    except CrmGraphError as exc:
        print(f"crmgraph: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"crmgraph: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
