"""Command-line entry point wiring the pipeline stages.

Subcommands: ingest, train, tune, evaluate, predict, report. Every run
writes a manifest (config hash, input hashes, seed) so reruns are
verifiable; outputs are written atomically. Exit codes: 0 success, 1
user/config error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import traceback

import numpy as np

from . import __version__, clean, evaluate, features, forest, gbt, lstm
from .artifacts import (Artifact, fingerprint_matrix, load_artifact,
                        predict_log_days, save_artifact, write_text_atomic)
from .config import RunConfig, load_config, require_paths, validate_config
from .errors import ConfigError, DataError
from .ingest import (join_geometry, parse_data_dictionary,
                     parse_perimeter_csv_lenient, read_shapefile_subset)
from .ingest.sidecar import read_geometry_sidecar
from .report import EvalReport, emit_report, emit_variance_note

# Fraction of the latest-alarm training rows held out as internal
# validation for LSTM epoch selection and GBT early stopping.
INTERNAL_VALIDATION_FRACTION = 0.1


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _write_manifest(config: RunConfig, subcommand: str, inputs: dict):
    payload = {
        "format_version": 1,
        "package_version": __version__,
        "subcommand": subcommand,
        "config_sha256": _sha256(config.config_bytes),
        "inputs": {name: _sha256(data) for name, data in sorted(inputs.items())},
        "seed": config.seed,
        "split_year": config.split_year,
    }
    os.makedirs(config.out_dir, exist_ok=True)
    path = os.path.join(config.out_dir, f"manifest_{subcommand}.json")
    write_text_atomic(path, json.dumps(payload, sort_keys=True, indent=1))


def _read_bytes(path: str) -> bytes:
    with open(path, "rb") as handle:
        return handle.read()


# --- ingest -------------------------------------------------------------------


def _load_geometry(path: str):
    """Returns (GeometryTable, {input name: bytes}) for either source kind."""
    if path.lower().endswith(".shp"):
        shp = _read_bytes(path)
        dbf_path = path[:-4] + ".dbf"
        if not os.path.exists(dbf_path):
            raise ConfigError(f"shapefile sidecar missing: {dbf_path}")
        dbf = _read_bytes(dbf_path)
        return read_shapefile_subset(shp, dbf), {"geometry_shp": shp, "geometry_dbf": dbf}
    data = _read_bytes(path)
    return read_geometry_sidecar(data), {"geometry": data}


def cmd_ingest(config: RunConfig) -> int:
    require_paths(config, "perimeter_csv", "dictionary", "geometry")
    perimeter_bytes = _read_bytes(config.perimeter_csv)
    dictionary_bytes = _read_bytes(config.dictionary)
    records, skipped = parse_perimeter_csv_lenient(perimeter_bytes)
    dictionary = parse_data_dictionary(dictionary_bytes)
    table, geometry_inputs = _load_geometry(config.geometry)

    joined, join_report = join_geometry(records, table)
    cleaned, report = clean.clean_records(
        joined, missing_geometry=join_report.unmatched + join_report.ambiguous)
    if not cleaned:
        raise DataError("no rows survived cleaning")
    stats = clean.descriptive_stats(cleaned)

    unknown_codes = {
        "CAUSE": sorted({r.cause_code for r in cleaned
                         if r.cause_code is not None
                         and r.cause_code not in dictionary.cause_labels}),
        "AGENCY": sorted({r.agency_code for r in cleaned
                          if r.agency_code is not None
                          and r.agency_code not in dictionary.agency_labels}),
        "C_METHOD": sorted({r.c_method_code for r in cleaned
                            if r.c_method_code is not None
                            and r.c_method_code not in dictionary.c_method_labels}),
        "OBJECTIVE": sorted({r.objective_code for r in cleaned
                             if r.objective_code is not None
                             and r.objective_code not in dictionary.objective_labels}),
    }

    os.makedirs(config.out_dir, exist_ok=True)
    write_text_atomic(config.resolved_clean_csv(), clean.records_to_clean_csv(cleaned))
    report_payload = {
        "rows_in": report.rows_in,
        "rows_out": report.rows_out,
        "dropped_by_reason": report.dropped_by_reason,
        "skipped_malformed_csv_lines": skipped,
        "join": {"matched": join_report.matched,
                 "unmatched": join_report.unmatched,
                 "ambiguous": join_report.ambiguous},
        "codes_missing_from_dictionary": unknown_codes,
    }
    write_text_atomic(os.path.join(config.out_dir, "clean_report.json"),
                      json.dumps(report_payload, sort_keys=True, indent=1))
    write_text_atomic(os.path.join(config.out_dir, "stats.csv"), stats.to_csv())
    _write_manifest(config, "ingest",
                    {"perimeter_csv": perimeter_bytes,
                     "dictionary": dictionary_bytes, **geometry_inputs})
    print(f"ingest: {report.rows_in} rows in, {report.rows_out} kept, "
          f"drops {report.dropped_by_reason}")
    return 0


# --- feature assembly shared by train/tune/evaluate ----------------------------


def _load_dataset(config: RunConfig):
    path = config.resolved_clean_csv()
    if not os.path.exists(path):
        raise ConfigError(f"cleaned dataset not found: {path} (run ingest first)")
    data = _read_bytes(path)
    records = clean.load_clean_csv(data)
    split = features.temporal_split(records, config.split_year)
    train_records = [r for r, label in zip(records, split) if label == features.TRAIN]
    spec = features.build_feature_spec(train_records)
    dataset = features.build_matrix(records, spec, split)
    return records, dataset, data


def _tail_validation_split(records, dataset):
    """Hold out the alarm-date tail of the training era as validation."""
    train_idx = np.flatnonzero(dataset.train_mask)
    ordered = sorted(train_idx, key=lambda i: (records[i].alarm_date, i))
    n_val = max(1, int(len(ordered) * INTERNAL_VALIDATION_FRACTION))
    fit_idx = np.array(ordered[:-n_val], dtype=int)
    val_idx = np.array(ordered[-n_val:], dtype=int)
    return fit_idx, val_idx


def _lstm_inputs(dataset, standardizer, idx):
    matrix = features.apply_standardizer(standardizer, dataset.features[idx])
    n_numeric = standardizer.n_numeric
    return matrix[:, :n_numeric], dataset.features[idx][:, n_numeric:].astype(int)


def _category_sizes(spec) -> list:
    return [len(spec.category_maps[c]) + 1 for c in spec.categorical_columns]


# --- train ---------------------------------------------------------------------


def cmd_train(config: RunConfig, model_name: str) -> int:
    records, dataset, clean_bytes = _load_dataset(config)
    train_mask = dataset.train_mask
    X_train = dataset.features[train_mask]
    y_train = dataset.target[train_mask]
    X_test = dataset.features[dataset.test_mask]
    standardizer = features.fit_standardizer(dataset)

    seeds = {"master": config.seed}
    spec = dataset.spec
    art_standardizer = None

    if model_name == "rf":
        params = dataclasses.replace(config.forest_params, seed=config.seed)
        model = forest.fit_forest(X_train, y_train, params, threads=config.threads)
        pred_log = forest.predict_forest(model, X_test)
        params_dict = dataclasses.asdict(params)
        seeds["per_tree"] = model.tree_seeds
    elif model_name == "gbt":
        params = dataclasses.replace(config.gbt_params, seed=config.seed)
        if params.early_stopping_rounds is not None:
            fit_idx, val_idx = _tail_validation_split(records, dataset)
            model = gbt.fit_gbt(dataset.features[fit_idx], dataset.target[fit_idx],
                                params, dataset.features[val_idx], dataset.target[val_idx])
        else:
            model = gbt.fit_gbt(X_train, y_train, params)
        pred_log = gbt.predict_gbt(model, X_test)
        params_dict = dataclasses.asdict(params)
    elif model_name == "lstm":
        params = dataclasses.replace(config.lstm_params, seed=config.seed)
        fit_idx, val_idx = _tail_validation_split(records, dataset)
        x_num, x_cat = _lstm_inputs(dataset, standardizer, fit_idx)
        xv_num, xv_cat = _lstm_inputs(dataset, standardizer, val_idx)
        model, _curve = lstm.fit_lstm(
            x_num, x_cat, dataset.target[fit_idx], _category_sizes(spec), params,
            xv_num, xv_cat, dataset.target[val_idx])
        xt_num, xt_cat = _lstm_inputs(dataset, standardizer, np.flatnonzero(dataset.test_mask))
        pred_log = lstm.lstm_predict(model, xt_num, xt_cat)
        params_dict = dataclasses.asdict(params)
        art_standardizer = standardizer
    else:
        raise ConfigError(f"unknown model: {model_name}")

    pred_days = evaluate.inverse_transform(pred_log)
    metrics = evaluate.compute_metrics(dataset.target_days[dataset.test_mask], pred_days)
    artifact = Artifact(
        kind=model_name, model=model, spec=spec, standardizer=art_standardizer,
        params=params_dict, seeds=seeds,
        train_fingerprint=fingerprint_matrix(X_train, y_train), metrics=metrics)

    os.makedirs(config.out_dir, exist_ok=True)
    save_artifact(os.path.join(config.out_dir, f"model_{model_name}.json"), artifact)
    write_text_atomic(os.path.join(config.out_dir, "dataset.csv"),
                      features.dataset_to_csv(dataset))
    write_text_atomic(os.path.join(config.out_dir, "feature_spec.json"), spec.to_json())
    _write_manifest(config, f"train_{model_name}", {"clean_csv": clean_bytes})
    print(f"train {model_name}: test MAE {metrics.mae_days:.4f} days, "
          f"RMSE {metrics.rmse_days:.4f}, R2 {metrics.r2_days:.4f}")
    return 0


# --- tune ----------------------------------------------------------------------


def cmd_tune(config: RunConfig, model_name: str) -> int:
    records, dataset, clean_bytes = _load_dataset(config)
    train_mask = dataset.train_mask
    X_train = dataset.features[train_mask]
    y_train = dataset.target[train_mask]
    os.makedirs(config.out_dir, exist_ok=True)

    if model_name in ("rf", "gbt"):
        grid = config.rf_grid if model_name == "rf" else config.gbt_grid
        cv = evaluate.kfold_indices(X_train.shape[0], k=5, seed=config.seed)
        best, table = evaluate.grid_search(model_name, grid, X_train, y_train, cv,
                                           threads=config.threads)
        write_text_atomic(
            os.path.join(config.out_dir, f"tuned_{model_name}.json"),
            json.dumps({"best_params": best}, sort_keys=True, indent=1))
        rows = [[json.dumps(row["params"], sort_keys=True),
                 *(repr(v) for v in row["fold_rmse"]), repr(row["mean_rmse"])]
                for row in table]
        header = ["params"] + [f"fold{i}_rmse" for i in range(cv.k)] + ["mean_rmse"]
        write_text_atomic(os.path.join(config.out_dir, f"tune_scores_{model_name}.csv"),
                          _csv_lines(header, rows))
        print(f"tune {model_name}: best {best}")
    elif model_name == "lstm":
        standardizer = features.fit_standardizer(dataset)
        fit_idx, val_idx = _tail_validation_split(records, dataset)
        x_num, x_cat = _lstm_inputs(dataset, standardizer, fit_idx)
        xv_num, xv_cat = _lstm_inputs(dataset, standardizer, val_idx)
        base = dataclasses.replace(config.lstm_params, seed=config.seed)
        best, trials = lstm.tune_lstm(
            x_num, x_cat, dataset.target[fit_idx], _category_sizes(dataset.spec),
            base, xv_num, xv_cat, dataset.target[val_idx],
            n_trials=config.lstm_trials, seed=config.seed)
        write_text_atomic(
            os.path.join(config.out_dir, "tuned_lstm.json"),
            json.dumps({"best_params": {
                "units": best.params.units,
                "dropout": best.params.dropout,
                "learning_rate": best.params.learning_rate,
            }, "val_rmse": best.val_rmse}, sort_keys=True, indent=1))
        rows = [[t.params.units, repr(t.params.dropout), repr(t.params.learning_rate),
                 t.seed, repr(t.val_rmse)] for t in trials]
        write_text_atomic(os.path.join(config.out_dir, "tune_trials_lstm.csv"),
                          _csv_lines(["units", "dropout", "learning_rate", "seed", "val_rmse"], rows))
        print(f"tune lstm: best units {best.params.units} "
              f"dropout {best.params.dropout:.4f} lr {best.params.learning_rate:.6f}")
    else:
        raise ConfigError(f"unknown model: {model_name}")
    _write_manifest(config, f"tune_{model_name}", {"clean_csv": clean_bytes})
    return 0


def _csv_lines(header, rows) -> str:
    import csv as _csv
    import io as _io
    out = _io.StringIO()
    writer = _csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()


# --- evaluate / report -----------------------------------------------------------


def cmd_evaluate(config: RunConfig) -> int:
    records, dataset, clean_bytes = _load_dataset(config)
    test_idx = np.flatnonzero(dataset.test_mask)
    true_days = dataset.target_days[test_idx]

    metrics, residual_bins, importances, error_points = {}, {}, {}, {}
    inputs = {"clean_csv": clean_bytes}
    found = 0
    for kind in ("rf", "gbt", "lstm"):
        path = os.path.join(config.out_dir, f"model_{kind}.json")
        if not os.path.exists(path):
            continue
        found += 1
        inputs[f"model_{kind}"] = _read_bytes(path)
        artifact = load_artifact(path)
        art_dataset = features.build_matrix(records, artifact.spec, dataset.split)
        pred_days = evaluate.inverse_transform(
            predict_log_days(artifact, art_dataset.features[test_idx]))
        metrics[kind] = evaluate.compute_metrics(true_days, pred_days)
        residual_bins[kind] = evaluate.residual_analysis(true_days, pred_days)
        if artifact.kind == "rf":
            importance = artifact.model.importances
        elif artifact.kind == "gbt":
            importance = artifact.model.importances
        else:
            importance = None
        if importance is not None:
            importances[kind] = list(zip(artifact.spec.column_names,
                                         [float(v) for v in importance]))
        error_points[kind] = [(float(t), float(p - t))
                              for t, p in zip(true_days, pred_days)]
    if not found:
        raise DataError(f"no model artifacts found in {config.out_dir} (run train first)")

    log_acres_col = dataset.spec.column_names.index("log_acres")
    acres_days = [(float(dataset.features[i, log_acres_col]), float(dataset.target_days[i]))
                  for i in test_idx]
    report = EvalReport(metrics=metrics, residual_bins=residual_bins,
                        importances=importances, acres_days_points=acres_days,
                        error_points=error_points, test_size=int(test_idx.size))
    write_text_atomic(os.path.join(config.out_dir, "eval_report.json"), report.to_json())
    _write_manifest(config, "evaluate", inputs)
    for kind in sorted(metrics):
        m = metrics[kind]
        print(f"evaluate {kind}: MAE {m.mae_days:.4f} RMSE {m.rmse_days:.4f} "
              f"R2 {m.r2_days:.4f}")
    return 0


def cmd_report(config: RunConfig) -> int:
    path = os.path.join(config.out_dir, "eval_report.json")
    if not os.path.exists(path):
        raise DataError(f"eval report not found: {path} (run evaluate first)")
    data = _read_bytes(path)
    report = EvalReport.from_json(data.decode("utf-8"))
    report_dir = os.path.join(config.out_dir, "report")
    written = emit_report(report, report_dir)
    emit_variance_note(report, report_dir)
    _write_manifest(config, "report", {"eval_report": data})
    print(f"report: wrote {len(written)} files to {report_dir}")
    return 0


# --- predict ----------------------------------------------------------------------


def cmd_predict(config: RunConfig, input_path: str, artifact_path: str) -> int:
    if not os.path.exists(input_path):
        raise ConfigError(f"input rows not found: {input_path}")
    if not os.path.exists(artifact_path):
        raise ConfigError(f"artifact not found: {artifact_path}")
    input_bytes = _read_bytes(input_path)
    artifact_bytes = _read_bytes(artifact_path)
    artifact = load_artifact(artifact_path)
    rows = clean.load_clean_csv(input_bytes)
    if not rows:
        raise DataError("input has no rows")
    dataset = features.build_matrix(rows, artifact.spec)
    pred_days = evaluate.inverse_transform(predict_log_days(artifact, dataset.features))
    lines = [["row_index", "predicted_days"]]
    lines += [[str(i), repr(float(v))] for i, v in enumerate(pred_days)]
    os.makedirs(config.out_dir, exist_ok=True)
    write_text_atomic(os.path.join(config.out_dir, "predictions.csv"),
                      "\n".join(",".join(line) for line in lines) + "\n")
    _write_manifest(config, "predict",
                    {"input": input_bytes, "artifact": artifact_bytes})
    print(f"predict: wrote {len(pred_days)} predictions")
    return 0


# --- entry point --------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON config file")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--split-year", type=int, default=None)
    common.add_argument("--out", default=None, help="output directory")

    parser = argparse.ArgumentParser(prog="firedur",
                                     description="Wildfire containment-duration pipeline")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("ingest", parents=[common])
    for name in ("train", "tune"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--model", required=True, choices=("rf", "gbt", "lstm"))
    sub.add_parser("evaluate", parents=[common])
    sub.add_parser("report", parents=[common])
    p = sub.add_parser("predict", parents=[common])
    p.add_argument("--input", required=True, help="rows CSV (cleaned-dataset format)")
    p.add_argument("--artifact", required=True, help="model artifact JSON")
    return parser


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    if args.out is not None:
        config.out_dir = args.out
    if args.seed is not None:
        config.seed = args.seed
    if args.split_year is not None:
        config.split_year = args.split_year
    if args.threads is not None:
        config.threads = args.threads
    validate_config(config)
    return config


def run(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    if args.subcommand == "ingest":
        return cmd_ingest(config)
    if args.subcommand == "train":
        return cmd_train(config, args.model)
    if args.subcommand == "tune":
        return cmd_tune(config, args.model)
    if args.subcommand == "evaluate":
        return cmd_evaluate(config)
    if args.subcommand == "report":
        return cmd_report(config)
    if args.subcommand == "predict":
        return cmd_predict(config, args.input, args.artifact)
    raise ConfigError(f"unknown subcommand: {args.subcommand}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        _print_error("config", exc)
        return 1
    except DataError as exc:
        _print_error("data", exc)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _print_error("internal", exc)
        traceback.print_exc()
        return 3


def _print_error(category: str, exc: Exception):
    print(json.dumps({"error": {
        "category": category,
        "type": type(exc).__name__,
        "message": str(exc),
    }}), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
