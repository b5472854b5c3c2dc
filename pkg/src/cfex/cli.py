"""Command-line entry points for the full pipeline.

Every subcommand that involves randomness takes a mandatory ``--seed`` and
produces byte-identical files when re-run with the same inputs. Report-style
subcommands write figures next to their CSV/JSON outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import plots
from .analysis import (
    change_frequency,
    kde_estimate,
    save_kde_csv,
    save_significance_csv,
    save_significance_json,
    significance_suite,
    top_features,
)
from .augmentation import (
    Scenario,
    build_cf_pool,
    build_scenario,
    counterfactuals_needed,
    run_experiment,
    save_augmented_split,
    save_experiment_table,
)
from .classifier import classify_unknown
from .dataset import load_dataset, save_dataset
from .engine import CfConfig, generate
from .errors import CfexError
from .model import Model, TrainConfig, evaluate_macro, train
from .schema import UNKNOWN_LABEL, FeatureSchema, PatientRecord, canonical_schema, record_from_mapping


def _load_schema(args) -> FeatureSchema:
    if getattr(args, "schema", None):
        return FeatureSchema.from_json(args.schema)
    return canonical_schema()


def _load_data(args, schema: FeatureSchema):
    if not getattr(args, "data", None):
        raise CfexError("--data is required for this subcommand")
    return load_dataset(args.data, schema)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cf_config(args) -> CfConfig:
    return CfConfig(
        k=args.k,
        lambda1=args.lambda1,
        lambda2=args.lambda2,
        max_iters=args.max_iters,
        seed=args.seed,
    )


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _add_common_cf_flags(parser, seed_required=True):
    parser.add_argument("--seed", type=int, required=seed_required, help="RNG seed")
    parser.add_argument("--k", type=int, default=5, help="counterfactuals per request")
    parser.add_argument("--lambda1", type=float, default=0.5, help="proximity weight")
    parser.add_argument("--lambda2", type=float, default=1.0, help="diversity weight")
    parser.add_argument("--max-iters", type=int, default=5000, help="optimizer iteration cap")


def _resolve_record(args, schema) -> PatientRecord:
    if args.record_id:
        data = _load_data(args, schema)
        record = data.by_id(args.record_id)
        return PatientRecord(id=record.id, label=UNKNOWN_LABEL, values=record.values)
    if args.values_json:
        payload = json.loads(Path(args.values_json).read_text(encoding="utf-8"))
        return record_from_mapping(schema, payload, id="query")
    raise CfexError("provide --record-id (with --data) or --values-json")


def cmd_ingest(args) -> int:
    schema = _load_schema(args)
    data = _load_data(args, schema)
    out = _out_dir(args)
    save_dataset(data, out / "cohort.csv")
    summary = {
        "records": len(data),
        "class_counts": data.class_counts(),
        "features": list(schema.feature_names),
        "ratio_warnings": [str(w) for w in data.ingest_warnings],
    }
    _write_json(out / "ingest_summary.json", summary)
    print(f"ingested {len(data)} records; {len(data.ingest_warnings)} ratio warning(s)")
    return 0


def cmd_train(args) -> int:
    schema = _load_schema(args)
    data = _load_data(args, schema)
    out = _out_dir(args)
    config = TrainConfig(
        learning_rate=args.lr, epochs=args.epochs, l2=args.l2, seed=args.seed
    )
    model = train(data, config)
    model.save(out / "model.json")
    metrics = evaluate_macro(model, data)
    _write_json(
        out / "train_summary.json",
        {
            "final_loss": model.loss_history[-1],
            "epochs": args.epochs,
            "train_metrics": metrics.as_dict(),
        },
    )
    print(f"trained on {len(data.labeled())} records; train macro F1 {metrics.macro_f1:.4f}")
    return 0


def cmd_explain(args) -> int:
    model = Model.load(args.model)
    record = _resolve_record(args, model.schema)
    out = _out_dir(args)
    config = _cf_config(args)
    targets = (
        list(model.schema.label_classes) if args.target == "all" else [args.target]
    )
    for target in targets:
        cfset = generate(model, record, target, config)
        cfset.save_json(out / f"counterfactuals_{target}.json")
        cfset.save_csv(out / f"counterfactuals_{target}.csv", model.schema.feature_names)
        n_ok = len(cfset.converged_members())
        print(f"{target}: {n_ok}/{config.k} converged")
    return 0


def cmd_classify(args) -> int:
    model = Model.load(args.model)
    record = _resolve_record(args, model.schema)
    out = _out_dir(args)
    report = classify_unknown(model, record, _cf_config(args))
    report.save_json(out / "distance_report.json")
    report.save_csv(out / "distance_report.csv", model.schema.feature_names)
    ranking = ", ".join(f"{label}={dist:.3f}" for label, dist in report.ranking())
    print(f"predicted {report.predicted} ({ranking})")
    return 0


def cmd_report(args) -> int:
    model = Model.load(args.model)
    data = _load_data(args, model.schema)
    out = _out_dir(args)
    config = _cf_config(args)
    sources = data.of_class(args.source)
    if not sources:
        raise CfexError(f"no records of class {args.source!r} in the data")
    cfsets = [generate(model, record, args.target_class, config) for record in sources]
    report = change_frequency(cfsets, schema=model.schema)
    stem = f"changes_{args.source}_to_{args.target_class}"
    report.save_csv(out / f"{stem}.csv")
    payload = report.to_json_dict()
    payload["top"] = [{"feature": f, "changes": c} for f, c in top_features(report, args.top)]
    _write_json(out / f"{stem}.json", payload)
    plots.plot_change_frequency(report, out / f"{stem}.png")
    top_txt = ", ".join(f"{f}({c})" for f, c in top_features(report, args.top)) or "none"
    print(
        f"{args.source}->{args.target_class}: {report.n_counterfactuals} counterfactuals, "
        f"top changes: {top_txt}"
    )
    return 0


def _parse_transitions(text: str | None, classes) -> list[tuple[str, str]]:
    if not text:
        return [(s, t) for s in classes for t in classes]
    out = []
    for chunk in text.split(","):
        source, _, target = chunk.partition(":")
        if not target:
            raise CfexError(f"bad transition {chunk!r}; expected SOURCE:TARGET")
        out.append((source.strip(), target.strip()))
    return out


def cmd_stats(args) -> int:
    model = Model.load(args.model)
    data = _load_data(args, model.schema)
    out = _out_dir(args)
    config = _cf_config(args)
    pools = []
    for source, target in _parse_transitions(args.transitions, model.schema.label_classes):
        for record in data.of_class(source):
            pools.append(generate(model, record, target, config))
    rows = significance_suite(data, pools)
    save_significance_csv(rows, out / "significance.csv")
    save_significance_json(rows, out / "significance.json")
    tested = [r for r in rows if r.result is not None]
    significant = [r for r in tested if r.result.p_value < 0.05]
    print(f"{len(tested)} tests computed, {len(significant)} significant at p<0.05, "
          f"{len(rows) - len(tested)} skipped")
    return 0


def cmd_kde(args) -> int:
    schema = _load_schema(args)
    data = _load_data(args, schema)
    out = _out_dir(args)
    feature = args.feature
    j = schema.index_of(feature)
    labels = [args.label_class] if args.label_class else list(schema.label_classes)
    curves = {}
    for label in labels:
        samples = [float(r.values[j]) for r in data.of_class(label)]
        if len(samples) < 2:
            print(f"{label}: skipped ({len(samples)} sample(s))")
            continue
        curve = kde_estimate(samples, bandwidth=args.bandwidth)
        curves[label] = curve
        save_kde_csv(curve, out / f"kde_{feature}_{label}.csv")
    if not curves:
        raise CfexError("no class had enough samples for a density estimate")
    plots.plot_kde_layers(curves, feature, out / f"kde_{feature}.png")
    print(f"wrote {len(curves)} curve(s) for {feature}")
    return 0


def cmd_augment(args) -> int:
    schema = _load_schema(args)
    data = _load_data(args, schema)
    out = _out_dir(args)
    scenario = Scenario(kind=args.scenario, seed=args.seed)
    pool = None
    if scenario.kind != "baseline":
        model = (
            Model.load(args.model)
            if args.model
            else train(data, TrainConfig(seed=args.seed))
        )
        needed = counterfactuals_needed(data.labeled(), scenario)
        pool = build_cf_pool(model, data.labeled(), _cf_config(args), needed, seed=args.seed)
    split = build_scenario(data, pool, scenario)
    save_augmented_split(split, out)
    _write_json(out / "composition.json", {"scenario": scenario.kind, **split.composition()})
    comp = split.composition()
    print(
        f"scenario {scenario.kind}: train {comp['train']['total']} "
        f"({comp['train']['real']} R, {comp['train']['cf']} CF), "
        f"test {comp['test']['total']} ({comp['test']['real']} R, {comp['test']['cf']} CF)"
    )
    return 0


def cmd_evaluate(args) -> int:
    schema = _load_schema(args)
    data = _load_data(args, schema)
    out = _out_dir(args)
    scenario = Scenario(kind=args.scenario, seed=args.seed)
    result = run_experiment(
        data,
        scenario,
        n_runs=args.runs,
        train_config=TrainConfig(seed=args.seed),
        cf_config=_cf_config(args),
    )
    result.save_json(out / f"experiment_{scenario.kind}.json")
    save_experiment_table([result], out / "evaluation_table.csv")
    summary = result.summary()
    plots.plot_metric_bars([(scenario.kind, summary)], out / "evaluation_metrics.png")
    f1 = summary["macro_f1"]
    print(
        f"scenario {scenario.kind}: macro F1 {100 * f1['mean']:.2f} +/- {100 * f1['std']:.2f} "
        f"over {result.n_runs} run(s)"
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    model = Model.load(args.model)
    schema = model.schema
    data = load_dataset(args.data, schema) if args.data else None
    app = create_app(model, data, default_seed=args.seed, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfex",
        description="Counterfactual explanations for tabular classifiers: "
        "train, explain, classify by transformation distance, report, augment.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and normalize a cohort CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--schema")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="fit the classifier")
    p.add_argument("--data", required=True)
    p.add_argument("--schema")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=600)
    p.add_argument("--l2", type=float, default=1e-3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("explain", help="counterfactuals for one record")
    p.add_argument("--model", required=True)
    p.add_argument("--data")
    p.add_argument("--record-id")
    p.add_argument("--values-json")
    p.add_argument("--target", default="all", help="target class or 'all'")
    _add_common_cf_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("classify", help="distance report for one record")
    p.add_argument("--model", required=True)
    p.add_argument("--data")
    p.add_argument("--record-id")
    p.add_argument("--values-json")
    _add_common_cf_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("report", help="change-frequency report for one transition")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="target_class", required=True)
    p.add_argument("--top", type=int, default=3)
    _add_common_cf_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("stats", help="two-track significance suite")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--transitions", help="comma list like MB:EP,PA:EP (default all)")
    _add_common_cf_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("kde", help="density curves for one feature")
    p.add_argument("--data", required=True)
    p.add_argument("--schema")
    p.add_argument("--feature", required=True)
    p.add_argument("--class", dest="label_class")
    p.add_argument("--bandwidth", default="auto")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_kde)

    p = sub.add_parser("augment", help="build an augmented train/test split")
    p.add_argument("--data", required=True)
    p.add_argument("--schema")
    p.add_argument("--model", help="generation model (trained on the fly if omitted)")
    p.add_argument("--scenario", choices=["baseline", "A", "B", "C"], required=True)
    _add_common_cf_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("evaluate", help="repeated stratified evaluation of a scenario")
    p.add_argument("--data", required=True)
    p.add_argument("--schema")
    p.add_argument("--scenario", choices=["baseline", "A", "B", "C"], required=True)
    p.add_argument("--runs", type=int, default=5)
    _add_common_cf_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="run the what-if HTTP service")
    p.add_argument("--model", required=True)
    p.add_argument("--data", help="cohort backing the report/kde endpoints")
    p.add_argument("--ui", help="directory with the built browser client to serve")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CfexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
