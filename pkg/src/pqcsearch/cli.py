"""Experiment driver.

Three subcommands:

* ``run <config>``   - full search run from a YAML/JSON config; writes
  report.json, iterations.csv, best_ansatz_<i>.json and summary.txt into the
  output directory.
* ``eval <ansatz> --data <spec>`` - train one fixed ansatz and print its
  train/validation metrics as JSON.
* ``gen <spec> -o <path>`` - materialize a synthetic dataset as CSV plus a
  ``scale.json`` sidecar holding the fitted per-column min/max.

Dataset specs are compact strings: ``quadratic1d``, ``quadratic2d`` or
``table``, optionally followed by ``:key=value,...`` (e.g.
``quadratic1d:n=500,noise_sd=0.5,seed=3`` or
``table:path=data.csv,target=y``).

Exit codes: 0 success, 1 configuration error, 2 IO error, 3 internal error.
All outputs are byte-reproducible from (config, seed) for any ``--jobs``.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import yaml

from .circuits import Ansatz, HeaSpec, build_hea, load_ansatz, save_ansatz, ansatz_to_dict
from .data import (
    Dataset,
    fit_minmax_and_scale,
    gen_quadratic_1d,
    gen_quadratic_2d,
    load_table,
    save_scale,
    save_table,
    split_dataset,
)
from .errors import ConfigurationError, ParseError, ScalingError
from .search import (
    CSV_HEADER,
    ModificationProbs,
    SearchConfig,
    best_candidate,
    derive_seed,
    report_csv_rows,
    report_to_dict,
    run_search,
)
from .training import TrainConfig, train

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_INTERNAL = 3

# seed-derivation domain tags
_TAG_DATA = 1
_TAG_SPLIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse usage problems are configuration errors
        raise ConfigurationError(message)


# --- dataset specs --------------------------------------------------------------

def parse_dataset_spec(spec: str) -> dict:
    """Parse ``kind[:k=v,...]`` into a dataset config dict."""
    kind, _, rest = spec.partition(":")
    cfg: dict = {"kind": kind.strip()}
    if rest:
        for item in rest.split(","):
            if not item:
                continue
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigurationError(f"bad dataset spec item {item!r} (expected key=value)")
            cfg[key.strip()] = value.strip()
    return cfg


_DATASET_KEYS = {
    "quadratic1d": {"n", "noise_sd", "noise_as_variance", "seed", "n_features"},
    "quadratic2d": {"n", "noise_sd", "noise_as_variance", "seed"},
    "table": {"path", "target"},
}


def build_dataset(cfg: dict, default_seed: int) -> Dataset:
    kind = cfg.get("kind")
    if kind not in _DATASET_KEYS:
        raise ConfigurationError(f"unknown dataset kind {kind!r} (choose from {sorted(_DATASET_KEYS)})")
    unknown = set(cfg) - _DATASET_KEYS[kind] - {"kind"}
    if unknown:
        raise ConfigurationError(f"unknown dataset option(s) for {kind}: {sorted(unknown)}")

    def geti(key, default):
        return int(cfg.get(key, default))

    def getf(key, default):
        return float(cfg.get(key, default))

    def getb(key, default):
        v = cfg.get(key, default)
        if isinstance(v, bool):
            return v
        return str(v).lower() in ("1", "true", "yes")

    if kind == "quadratic1d":
        return gen_quadratic_1d(
            n=geti("n", 500),
            noise_sd=getf("noise_sd", 0.5),
            seed=geti("seed", default_seed),
            n_features=geti("n_features", 4),
            noise_as_variance=getb("noise_as_variance", False),
        )
    if kind == "quadratic2d":
        return gen_quadratic_2d(
            n=geti("n", 200),
            noise_sd=getf("noise_sd", 0.5),
            seed=geti("seed", default_seed),
            noise_as_variance=getb("noise_as_variance", False),
        )
    path = cfg.get("path")
    target = cfg.get("target")
    if not path or not target:
        raise ConfigurationError("table dataset needs path=... and target=...")
    return load_table(path, target)


# --- experiment config ------------------------------------------------------------

_TOP_KEYS = {"dataset", "ansatz", "search", "train", "split", "seed", "out_dir"}


def _require_mapping(doc, name: str) -> dict:
    if not isinstance(doc, dict):
        raise ConfigurationError(f"{name} must be a mapping, got {type(doc).__name__}")
    return doc


def load_experiment_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError:
        raise
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"cannot parse config: {exc}") from exc
    doc = _require_mapping(doc, "config")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config key(s): {sorted(unknown)}")
    if "dataset" not in doc:
        raise ConfigurationError("config needs a 'dataset' section")
    if "ansatz" not in doc:
        raise ConfigurationError("config needs an 'ansatz' section")
    return doc


def _build_ansatz(cfg: dict) -> Ansatz:
    cfg = _require_mapping(cfg, "ansatz")
    has_hea = {"n_qubits", "k", "m"} & set(cfg)
    has_file = "file" in cfg
    if has_file and has_hea:
        raise ConfigurationError("ansatz: give either a file or an HEA shape, not both")
    if has_file:
        return load_ansatz(cfg["file"])
    missing = {"n_qubits", "k", "m"} - set(cfg)
    if missing:
        raise ConfigurationError(f"ansatz: missing key(s) {sorted(missing)}")
    unknown = set(cfg) - {"n_qubits", "k", "m"}
    if unknown:
        raise ConfigurationError(f"ansatz: unknown key(s) {sorted(unknown)}")
    return build_hea(HeaSpec(int(cfg["n_qubits"]), int(cfg["k"]), int(cfg["m"])))


def _build_train_config(cfg: dict, shuffle_seed: int = 0) -> TrainConfig:
    cfg = _require_mapping(cfg, "train")
    known = {"epochs", "batch_size", "learning_rate", "adam_beta1", "adam_beta2", "adam_eps"}
    unknown = set(cfg) - known
    if unknown:
        raise ConfigurationError(f"train: unknown key(s) {sorted(unknown)}")
    return TrainConfig(
        epochs=int(cfg.get("epochs", 200)),
        batch_size=int(cfg.get("batch_size", 25)),
        learning_rate=float(cfg.get("learning_rate", 1e-2)),
        adam_beta1=float(cfg.get("adam_beta1", 0.9)),
        adam_beta2=float(cfg.get("adam_beta2", 0.999)),
        adam_eps=float(cfg.get("adam_eps", 1e-8)),
        shuffle_seed=shuffle_seed,
    )


def _build_search_config(cfg: dict, train_cfg: TrainConfig, master_seed: int) -> SearchConfig:
    cfg = _require_mapping(cfg, "search")
    known = {"iterations", "samples", "top_k", "probs", "elitism"}
    unknown = set(cfg) - known
    if unknown:
        raise ConfigurationError(f"search: unknown key(s) {sorted(unknown)}")
    probs_cfg = _require_mapping(cfg.get("probs", {}), "search.probs")
    unknown = set(probs_cfg) - {"add", "remove", "switch", "move"}
    if unknown:
        raise ConfigurationError(f"search.probs: unknown key(s) {sorted(unknown)}")
    probs = ModificationProbs(
        add=float(probs_cfg.get("add", 0.1)),
        remove=float(probs_cfg.get("remove", 0.1)),
        switch=float(probs_cfg.get("switch", 0.1)),
        move=float(probs_cfg.get("move", 0.1)),
    )
    return SearchConfig(
        iterations=int(cfg.get("iterations", 3)),
        samples_total=int(cfg.get("samples", 100)),
        top_k=int(cfg.get("top_k", 10)),
        probs=probs,
        master_seed=master_seed,
        elitism=bool(cfg.get("elitism", False)),
        train=train_cfg,
    )


def _prepare_data(doc: dict, master_seed: int):
    """Dataset -> scaled arrays: ((train_X, train_y), (val_X, val_y), mse_factor)."""
    split_cfg = _require_mapping(doc.get("split", {}), "split")
    unknown = set(split_cfg) - {"train_fraction", "seed", "scale_on_train_only"}
    if unknown:
        raise ConfigurationError(f"split: unknown key(s) {sorted(unknown)}")
    ds = build_dataset(_require_mapping(doc["dataset"], "dataset"), derive_seed(master_seed, _TAG_DATA))
    split_seed = int(split_cfg.get("seed", derive_seed(master_seed, _TAG_SPLIT)))
    split = split_dataset(ds, float(split_cfg.get("train_fraction", 0.8)), seed=split_seed)
    fit_rows = split.train if bool(split_cfg.get("scale_on_train_only", False)) else None
    scaled = fit_minmax_and_scale(ds, fit_rows=fit_rows)
    train_set = (scaled.X[split.train], scaled.y[split.train])
    val_set = (scaled.X[split.val], scaled.y[split.val])
    return train_set, val_set, scaled.scale.mse_factor()


def _float_str(v: float) -> str:
    return json.dumps(v)


def _write_summary(report: dict, path: Path) -> None:
    """Per-iteration best rows, values formatted exactly as in report.json."""
    rows = [("row", "train_mse", "train_r2", "val_mse", "val_r2")]
    for it in report["iterations"]:
        best = min(it["candidates"], key=lambda c: c["rank"])
        label = "base" if it["iteration"] == 0 else f"iter{it['iteration']}"
        rows.append(
            (
                label,
                _float_str(best["train_mse"]),
                _float_str(best["train_r2"]),
                _float_str(best["val_mse"]),
                _float_str(best["val_r2"]),
            )
        )
    widths = [max(len(r[c]) for r in rows) for c in range(5)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    path.write_text("\n".join(lines) + "\n")


def cmd_run(args) -> int:
    doc = load_experiment_config(args.config)
    master_seed = int(args.seed if args.seed is not None else doc.get("seed", 0))
    out_dir = Path(args.out_dir if args.out_dir is not None else doc.get("out_dir", "."))

    base = _build_ansatz(doc["ansatz"])
    train_cfg = _build_train_config(doc.get("train", {}))
    search_cfg = _build_search_config(doc.get("search", {}), train_cfg, master_seed)
    train_set, val_set, mse_factor = _prepare_data(doc, master_seed)

    reports, _top = run_search(base, train_set, val_set, search_cfg, jobs=args.jobs)

    out_dir.mkdir(parents=True, exist_ok=True)
    report = report_to_dict(reports, mse_factor=mse_factor)
    report["seed"] = master_seed
    (out_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    (out_dir / "iterations.csv").write_text(
        "\n".join([CSV_HEADER] + report_csv_rows(reports, mse_factor=mse_factor)) + "\n"
    )
    for rep in reports:
        best = best_candidate(rep)
        doc_best = {
            "iteration": rep.iteration,
            "id": best.id,
            "parent": best.parent_id,
            "seed": best.seed,
            "modifications": [m.to_dict() for m in best.log],
            "val_mse": best.val_mse * mse_factor,
            "val_r2": best.result.val.r2 if best.result else None,
            "ansatz": ansatz_to_dict(best.ansatz),
        }
        (out_dir / f"best_ansatz_{rep.iteration}.json").write_text(json.dumps(doc_best, indent=2) + "\n")
    _write_summary(report, out_dir / "summary.txt")
    return EXIT_OK


def cmd_eval(args) -> int:
    ansatz = load_ansatz(args.ansatz)
    master_seed = int(args.seed if args.seed is not None else 0)
    doc = {"dataset": parse_dataset_spec(args.data)}
    train_set, val_set, mse_factor = _prepare_data(doc, master_seed)
    cfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        shuffle_seed=derive_seed(master_seed, 0, 0, 0, 1),
    )
    result = train(ansatz, train_set, val_set, cfg)
    out = {
        "train": {"mse": result.train.mse * mse_factor, "r2": result.train.r2},
        "validation": {"mse": result.val.mse * mse_factor, "r2": result.val.r2},
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = parse_dataset_spec(args.spec)
    if cfg.get("kind") == "table":
        raise ConfigurationError("gen produces synthetic datasets; kind must be quadratic1d or quadratic2d")
    master_seed = int(args.seed if args.seed is not None else 0)
    ds = build_dataset(cfg, derive_seed(master_seed, _TAG_DATA))
    scaled = fit_minmax_and_scale(ds)  # raw values are written; the sidecar records the fit
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    save_table(ds, out)
    save_scale(scaled.scale, ds.feature_names, ds.target_name, out.parent / "scale.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pqcsearch", description="Gate-modification architecture search for circuit regression models")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for candidate training")
    common.add_argument("--out-dir", default=None, help="output directory (overrides config)")

    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", parents=[common], help="run a search experiment from a config file")
    p_run.add_argument("config", help="YAML/JSON experiment config")
    p_run.set_defaults(func=cmd_run)

    p_eval = sub.add_parser("eval", parents=[common], help="train and evaluate a single ansatz")
    p_eval.add_argument("ansatz", help="ansatz JSON file")
    p_eval.add_argument("--data", required=True, help="dataset spec, e.g. quadratic1d:n=500")
    p_eval.add_argument("--epochs", type=int, default=200)
    p_eval.add_argument("--batch-size", type=int, default=25)
    p_eval.add_argument("--learning-rate", type=float, default=1e-2)
    p_eval.set_defaults(func=cmd_eval)

    p_gen = sub.add_parser("gen", parents=[common], help="materialize a synthetic dataset as CSV")
    p_gen.add_argument("spec", help="dataset spec, e.g. quadratic1d:n=500,seed=3")
    p_gen.add_argument("-o", "--out", required=True, help="output CSV path")
    p_gen.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ParseError, ScalingError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001 - last-resort boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
