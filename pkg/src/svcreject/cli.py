"""Command-line pipeline: train, calibrate, explain, bench.

Models are plain JSON files, so externally supplied weights can be explained
without retraining.  Exit codes: 0 success, 1 internal verification failure,
2 input/validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import artifacts, dataset, explainer, rejector, trainer

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2


class VerificationFailure(RuntimeError):
    """An emitted explanation failed re-verification; treated as a bug trap."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svcreject",
        description="Train a linear SVC, calibrate a reject band, and compute "
                    "provably minimal per-instance explanations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--input", help="CSV file (header row, comma separated)")
        p.add_argument("--model", help="model JSON file")
        p.add_argument("--output", help="output file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--C", dest="C", type=float, default=1.0,
                       help="soft-margin trade-off (default 1.0)")
        p.add_argument("--wr", type=float, default=0.24,
                       help="rejection cost in (0, 1] (default 0.24)")
        p.add_argument("--fraction", type=float, default=0.7,
                       help="train fraction for the stratified split (default 0.7)")
        p.add_argument("--order", choices=("ascending", "descending-weight", "lex"),
                       default="ascending", help="feature elimination order")
        p.add_argument("--scope", choices=("train", "test", "all"), default="all",
                       help="which rows of --input to use (needs the split "
                            "manifest for train/test)")
        p.add_argument("--grid-steps", type=int, default=rejector.DEFAULT_GRID_STEPS,
                       help="threshold grid resolution (default 100)")

    p_train = sub.add_parser("train", help="fit a soft-margin linear SVC from a CSV")
    common(p_train)
    p_train.add_argument("--label-column", required=True)
    p_train.add_argument("--positive-label", required=True,
                         help="label value mapped to +1; all others map to -1")
    p_train.add_argument("--tolerance", type=float, default=1e-6)
    p_train.add_argument("--max-passes", type=int, default=10_000)

    common(sub.add_parser("calibrate", help="fit the reject band on training rows"))
    common(sub.add_parser("explain", help="minimal explanation per instance, as JSONL"))
    common(sub.add_parser("bench", help="time explanations without writing them"))
    return parser


def _require(args, *names) -> None:
    for name in names:
        if getattr(args, name.replace("-", "_")) is None:
            raise dataset.DatasetError(f"--{name} is required for this command")


def _read_feature_rows(path, bundle: artifacts.ModelBundle) -> np.ndarray:
    """Read raw feature rows from a CSV, matching columns to the model by name."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise dataset.DatasetError(f"{path}: file is empty") from None
        missing = [n for n in bundle.space.names if n not in header]
        if missing:
            raise dataset.DatasetError(f"{path}: missing feature columns {missing}")
        cols = [header.index(n) for n in bundle.space.names]
        rows = []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(row[c]) for c in cols])
            except (ValueError, IndexError):
                raise dataset.DatasetError(
                    f"{path}: row {row_no} has unparseable feature values"
                ) from None
    return np.asarray(rows, dtype=float).reshape(-1, len(bundle.space))


def _scope_indices(scope: str, n_rows: int, bundle: artifacts.ModelBundle) -> np.ndarray:
    if scope == "all":
        return np.arange(n_rows)
    if bundle.split is None:
        raise dataset.DatasetError(
            f"--scope {scope} needs a model file with a split manifest"
        )
    idx = np.asarray(
        bundle.split.train_indices if scope == "train" else bundle.split.test_indices,
        dtype=int,
    )
    if idx.size and idx.max() >= n_rows:
        raise dataset.DatasetError(
            "split manifest indices exceed the input row count; "
            "pass the CSV the model was trained on"
        )
    return idx


def _feature_order(name: str, bundle: artifacts.ModelBundle) -> list[int]:
    n = len(bundle.space)
    if name == "ascending":
        return list(range(n))
    if name == "descending-weight":
        return list(np.argsort(-np.abs(bundle.model.weights), kind="stable"))
    return sorted(range(n), key=lambda i: bundle.space.names[i])


def cmd_train(args) -> int:
    _require(args, "input", "model")
    raw, y, names = dataset.load_csv(args.input, args.label_column, args.positive_label)
    space, scaling, full = dataset.scale_dataset(raw, y, names)
    train_idx, test_idx = dataset.stratified_split_indices(full.y, args.fraction, args.seed)
    train_ds = dataset.LabeledDataset(full.X[train_idx], full.y[train_idx])
    test_ds = dataset.LabeledDataset(full.X[test_idx], full.y[test_idx])

    config = trainer.TrainerConfig(C=args.C, tolerance=args.tolerance,
                                   max_passes=args.max_passes, seed=args.seed)
    model, report = trainer.train_soft_margin(train_ds, config)

    bundle = artifacts.ModelBundle(
        space=space, scaling=scaling, model=model,
        label_column=args.label_column, positive_label=str(args.positive_label),
        split=artifacts.SplitManifest(
            seed=args.seed, train_fraction=args.fraction,
            train_indices=tuple(int(i) for i in train_idx),
            test_indices=tuple(int(i) for i in test_idx),
        ),
    )
    artifacts.save_bundle(args.model, bundle)
    if args.output:
        dataset.save_dataset(args.output, space, scaling, full)

    def accuracy(ds):
        pred = np.where(trainer.decision_values(model, ds.X) > 0.0, 1.0, -1.0)
        return float(np.mean(pred == ds.y))

    print(f"trained on {len(train_ds)} rows, {len(space)} features "
          f"(C={args.C:g}, seed={args.seed})")
    print(f"passes used: {report.passes_used}  converged: {report.converged}  "
          f"dual gap: {report.dual_gap:.3g}")
    print(f"primal objective: {report.primal_objective:.6f}  "
          f"max margin violation: {report.max_margin_violation:.3g}")
    print(f"train accuracy: {accuracy(train_ds):.2%}")
    print(f"test accuracy: {accuracy(test_ds):.2%}")
    print(f"model written to {args.model}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    _require(args, "input", "model", "output")
    bundle = artifacts.load_bundle(args.model)
    raw = _read_feature_rows(args.input, bundle)
    scaled, _ = dataset.apply_scaling(raw, bundle.scaling)
    labels = _read_labels(args.input, bundle)

    if bundle.split is not None:
        cal_idx = np.asarray(bundle.split.train_indices, dtype=int)
        if cal_idx.size and cal_idx.max() >= scaled.shape[0]:
            raise dataset.DatasetError(
                "split manifest indices exceed the input row count; "
                "pass the CSV the model was trained on"
            )
    else:
        cal_idx = np.arange(scaled.shape[0])
    cal_ds = dataset.LabeledDataset(scaled[cal_idx], labels[cal_idx])

    rm, risk = rejector.calibrate(bundle.model, cal_ds, args.wr, args.grid_steps)
    out = bundle.with_reject(rm, risk)
    artifacts.save_bundle(args.output, out)

    scope_idx = _scope_indices(args.scope, scaled.shape[0], bundle)
    metrics = rejector.evaluate(rm, dataset.LabeledDataset(scaled[scope_idx], labels[scope_idx]))
    metrics_path = Path(str(args.output) + ".metrics.json")
    metrics_path.write_text(
        json.dumps({"scope": args.scope, **rejector.metrics_to_json(rm, metrics)},
                   indent=2) + "\n"
    )
    print(f"calibrated on {len(cal_ds)} rows at w_r={args.wr:g} "
          f"(grid index {risk.grid_index}, risk {risk.risk:.6f})")
    print(f"metrics on scope {args.scope!r}:")
    print(rejector.format_metrics_table(rm, metrics))
    print(f"reject model written to {args.output}")
    return EXIT_OK


def _read_labels(path, bundle: artifacts.ModelBundle) -> np.ndarray:
    """Labels for calibration/metrics, using the label metadata stored at training."""
    if bundle.label_column is None or bundle.positive_label is None:
        raise dataset.DatasetError(
            "model file has no label metadata; re-train with the CLI or add "
            "label_column/positive_label to the file"
        )
    _, labels, _ = dataset.load_csv(path, bundle.label_column, bundle.positive_label)
    return labels


def _explain_rows(args, verify: bool = True):
    """Shared explain/bench loop: yields per-row explanation records."""
    _require(args, "input", "model")
    bundle = artifacts.load_bundle(args.model)
    rm = bundle.reject_model()
    raw = _read_feature_rows(args.input, bundle)
    scaled, _ = dataset.apply_scaling(raw, bundle.scaling)
    rows = _scope_indices(args.scope, scaled.shape[0], bundle)
    order = _feature_order(args.order, bundle)
    space = bundle.space

    results = []
    skipped = []
    for row in rows.tolist():
        x = scaled[row]
        if not space.contains(x):
            skipped.append(row)
            continue
        expl = explainer.minimal_explanation(rm, space, x, order)
        if verify:
            report = explainer.verify_explanation(rm, space, expl)
            if not report:
                raise VerificationFailure(
                    f"row {row}: explanation failed verification: "
                    + "; ".join(report.violations)
                )
        results.append((row, raw[row], expl))
    return bundle, results, skipped


def _jsonl_record(bundle, rm, row, raw_row, expl) -> dict:
    names = bundle.space.names
    return {
        "index": int(row),
        "class": int(expl.klass),
        "kept": [
            {"feature": names[i], "value": v, "raw_value": float(raw_row[i])}
            for i, v in expl.kept
        ],
        "removed": [names[i] for i in expl.removed],
        "witnesses": [
            {
                "feature": names[i],
                "point": [float(v) for v in witness],
                "class": int(rejector.predict_with_reject(rm, witness)),
            }
            for i, witness in sorted(expl.certificates.items())
        ],
        "time_seconds": expl.time_seconds,
    }


def _per_class_stats(results) -> dict:
    stats: dict[int, dict] = {}
    for _, _, expl in results:
        entry = stats.setdefault(expl.klass, {"sizes": [], "times": [], "queries": 0})
        entry["sizes"].append(len(expl.kept))
        entry["times"].append(expl.time_seconds)
        entry["queries"] += expl.queries
    out = {}
    for klass, entry in sorted(stats.items()):
        sizes = np.array(entry["sizes"], dtype=float)
        times = np.array(entry["times"], dtype=float)
        out[klass] = {
            "patterns": int(sizes.size),
            "size_mean": float(sizes.mean()),
            "size_std": float(sizes.std()),
            "time_mean": float(times.mean()),
            "time_std": float(times.std()),
            "queries": entry["queries"],
        }
    return out


def _print_stats(stats: dict) -> None:
    label = {-1: "negative", 0: "rejected", 1: "positive"}
    for klass, s in stats.items():
        print(f"{label[klass]}: {s['patterns']} pattern(s), "
              f"size {s['size_mean']:.2f} +- {s['size_std']:.2f}, "
              f"time {s['time_mean'] * 1e3:.3f} +- {s['time_std'] * 1e3:.3f} ms, "
              f"{s['queries']} queries")


def cmd_explain(args) -> int:
    _require(args, "output")
    bundle, results, skipped = _explain_rows(args)
    for row in skipped:
        print(f"warning: row {row} is outside the model's feature domains; skipped",
              file=sys.stderr)

    rm = bundle.reject_model()
    with Path(args.output).open("w") as fh:
        for row, raw_row, expl in results:
            fh.write(json.dumps(_jsonl_record(bundle, rm, row, raw_row, expl)) + "\n")

    stats = _per_class_stats(results)
    freq = explainer.feature_frequency([expl for _, _, expl in results])
    summary = {
        "patterns": len(results),
        "skipped_rows": skipped,
        "classes": {str(k): v for k, v in stats.items()},
        "frequency": freq.to_json(bundle.space.names),
    }
    summary_path = Path(str(args.output) + ".summary.json")
    summary_path.write_text(json.dumps(summary, indent=2) + "\n")

    print(f"explained {len(results)} instance(s); "
          f"{len(skipped)} skipped as out of domain")
    _print_stats(stats)
    if results:
        print(freq.format_text(bundle.space.names))
    print(f"explanations written to {args.output}")
    return EXIT_OK


def cmd_bench(args) -> int:
    bundle, results, skipped = _explain_rows(args)
    stats = _per_class_stats(results)
    total_queries = sum(expl.queries for _, _, expl in results)
    n = len(bundle.space)
    report = {
        "instances": len(results),
        "features": n,
        "skipped_rows": skipped,
        "total_queries": total_queries,
        "knife_edge_queries": sum(expl.knife_edge_queries for _, _, expl in results),
        "max_queries_per_instance": max((expl.queries for _, _, expl in results), default=0),
        "query_budget_per_instance": 2 * n,
        "classes": {str(k): v for k, v in stats.items()},
    }
    if args.output:
        Path(args.output).write_text(json.dumps(report, indent=2) + "\n")

    print(f"benchmarked {len(results)} instance(s) over {n} features")
    _print_stats(stats)
    print(f"total feasibility queries: {total_queries} "
          f"(budget {2 * n} per instance)")
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "calibrate": cmd_calibrate,
    "explain": cmd_explain,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except VerificationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (FileNotFoundError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
