"""Command-line front end.

Subcommands: extract, train, eval, grid, make-toy-corpus, report.
Exit codes: 0 success, 1 partial failure (some files or cells failed),
2 configuration error. SERKIT_WORKERS overrides default worker counts.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .audio import condition_wav
from .errors import ConfigInvalid, SerkitError
from .functionals import apply_functionals, export_feature_csv, get_builtin_set
from .grid import load_cell_model, render_table, run_cell, run_grid
from .lld import extract_llds
from .manifest import load_manifest, split
from .metrics import compute_metrics
from .nn import TrainConfig
from .svm import SvmModel
from .toy import make_toy_corpus
from .training import Standardizer, evaluate_model, feature_path
from . import grid as grid_mod

log = logging.getLogger("serkit.cli")


def _workers(flag_value, default):
    if flag_value is not None:
        return max(1, flag_value)
    env = os.environ.get("SERKIT_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigInvalid(f"SERKIT_WORKERS must be an integer, got {env!r}") from None
    return max(1, default)


def _load_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc


# -- extract -------------------------------------------------------------------

def cmd_extract(args):
    manifest = load_manifest(args.manifest, args.filename_rule)
    out_dir = Path(args.features_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = _workers(args.workers, os.cpu_count() or 1)
    started = time.monotonic()

    def _one(entry):
        target = feature_path(out_dir, entry.path, args.frame_ms)
        try:
            if args.skip_existing and target.exists():
                return entry.path, None, np.load(target)
            clip = condition_wav(entry.path)
            llds = extract_llds(clip, args.frame_ms)
            np.save(target, llds.values)
            return entry.path, None, llds
        except SerkitError as exc:
            return entry.path, f"{type(exc).__name__}: {exc}", None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one, manifest.entries))
    else:
        results = [_one(e) for e in manifest.entries]

    failures = {path: err for path, err, _ in results if err}
    for path, err in failures.items():
        log.error("extract failed for %s: %s", path, err)

    if args.functional_set:
        fset = get_builtin_set(args.functional_set)
        vectors = []
        for (path, err, llds), entry in zip(results, manifest.entries):
            if err:
                continue
            if not hasattr(llds, "values"):  # cached .npy reload
                from .lld import FEATURE_NAMES, LldMatrix
                llds = LldMatrix(values=llds, feature_names=FEATURE_NAMES,
                                 frame_ms=args.frame_ms,
                                 clip_id=Path(path).stem)
            vectors.append(apply_functionals(llds, fset))
        csv_path = out_dir / f"functionals_{args.functional_set}_{args.frame_ms}ms.csv"
        export_feature_csv(csv_path, vectors)
        log.info("wrote %d vectors to %s", len(vectors), csv_path)

    summary = {
        "manifest": str(args.manifest),
        "frame_ms": args.frame_ms,
        "requested": len(manifest.entries),
        "extracted": len(manifest.entries) - len(failures),
        "failed": len(failures),
        "failures": failures,
        "fear_dropped": manifest.fear_dropped,
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    summary_path = out_dir / f"extract_summary_{args.frame_ms}ms.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
    print(f"extracted {summary['extracted']}/{summary['requested']} clips "
          f"at {args.frame_ms} ms -> {out_dir}")
    return 1 if failures else 0


# -- train ---------------------------------------------------------------------

def _feature_cfg_from_args(args):
    if args.feature_csv:
        cfg = {"source": "csv", "path": str(args.feature_csv)}
        if args.expected_dim:
            cfg["expected_dim"] = args.expected_dim
        return cfg
    if args.functional_set:
        return {"source": "functionals", "frame_ms": args.frame_ms,
                "set": args.functional_set}
    return {"source": "llds", "frame_ms": args.frame_ms}


def _train_overrides(args):
    overrides = {}
    for flag, key in (("optimizer", "optimizer"), ("learning_rate", "learning_rate"),
                      ("batch_size", "batch_size"), ("epochs", "max_epochs"),
                      ("seed", "seed"), ("patience", "early_stop_patience"),
                      ("dropout", "dropout_rate")):
        value = getattr(args, flag)
        if value is not None:
            overrides[key] = value
    return overrides


def cmd_train(args):
    config = _load_json(args.config) if args.config else {}
    cell = {
        "name": args.name or (args.model or config.get("model", {}).get("kind", "model")),
        "model": dict(config.get("model", {})),
        "features": dict(config.get("features", {})) or _feature_cfg_from_args(args),
    }
    if args.model:
        cell["model"]["kind"] = args.model
    if "kind" not in cell["model"]:
        raise ConfigInvalid("model kind required (--model or config file)")
    if args.dropout is not None:
        cell["model"].setdefault("dropout", args.dropout)
    train_section = dict(config.get("train", {}))
    train_section.update(_train_overrides(args))
    grid_config = {
        "manifest": str(args.manifest),
        "filename_rule": args.filename_rule,
        "features_dir": str(args.features_dir),
        "split": dict(config.get("split", {})),
        "train": train_section,
        "cells": [cell],
    }
    if args.split_seed is not None:
        grid_config["split"]["seed"] = args.split_seed
    result = run_grid(grid_config, args.out, workers=1)
    print(render_table(result.cells), end="")
    print(f"run directory: {result.run_dir}")
    return 1 if result.failed else 0


# -- eval ----------------------------------------------------------------------

def cmd_eval(args):
    cell_dir = Path(args.cell_dir)
    spec, model, std, cfg = load_cell_model(cell_dir)
    context = cfg.get("context", {})
    manifest_path = args.manifest or context.get("manifest")
    if not manifest_path:
        raise ConfigInvalid("no manifest stored with the cell; pass --manifest")
    features_dir = args.features_dir or context.get("features_dir")
    if not features_dir:
        raise ConfigInvalid("no features_dir stored with the cell; pass --features-dir")
    manifest = load_manifest(manifest_path, context.get("filename_rule"))

    if args.split == "all":
        subset = manifest
    else:
        split_cfg = context.get("split", {})
        parts = split(manifest,
                      ratios=tuple(split_cfg.get("ratios", (0.8, 0.1, 0.1))),
                      seed=split_cfg.get("seed", 42),
                      speaker_disjoint=split_cfg.get("speaker_disjoint", False))
        subset = dict(zip(("train", "val", "test"), parts))[args.split]

    x, _ = grid_mod.resolve_features(subset, cfg["features"], features_dir)
    y = subset.labels()
    metadata = {"cell_dir": str(cell_dir), "split": args.split,
                "manifest": str(manifest_path)}
    if isinstance(model, SvmModel):
        report = compute_metrics(y, model.predict(x), run_metadata=metadata)
    else:
        report = evaluate_model(model, std.transform(x), y, run_metadata=metadata)
    out_path = cell_dir / f"eval_{args.split}.json"
    out_path.write_text(report.to_json() + "\n", encoding="utf-8")
    print(f"split={args.split} n={report.num_evaluated} "
          f"UA={report.ua:.2f} WA={report.wa:.2f}")
    print(f"report: {out_path}")
    return 0


# -- grid ----------------------------------------------------------------------

def cmd_grid(args):
    config = _load_json(args.config)
    workers = _workers(args.workers, 1)
    result = run_grid(config, args.out, workers=workers)
    print(render_table(result.cells), end="")
    print(f"run directory: {result.run_dir}")
    return 1 if result.failed else 0


# -- make-toy-corpus -----------------------------------------------------------

def cmd_make_toy_corpus(args):
    manifest_path = make_toy_corpus(args.out, seed=args.seed,
                                    clips_per_class=args.clips_per_class,
                                    sample_rate=args.sample_rate)
    print(f"toy corpus written; manifest: {manifest_path}")
    return 0


# -- report --------------------------------------------------------------------

def cmd_report(args):
    run_dir = Path(args.run_dir)
    table = run_dir / "table.txt"
    reports = sorted(run_dir.glob("cell-*/report.json"))
    if not table.exists() and not reports:
        raise ConfigInvalid(f"{run_dir} holds no table.txt or cell reports")
    if args.json:
        # stdout must stay a single parseable document
        merged = {path.parent.name: json.loads(path.read_text(encoding="utf-8"))
                  for path in reports}
        print(json.dumps(merged, indent=2, sort_keys=True))
        return 0
    if table.exists():
        print(table.read_text(encoding="utf-8"), end="")
    for path in reports:
        data = json.loads(path.read_text(encoding="utf-8"))
        recalls = ", ".join("absent" if r is None else f"{r:.1f}"
                            for r in data["per_class_recall"])
        print(f"{path.parent.name}: UA {data['ua']:.2f} WA {data['wa']:.2f} "
              f"per-class recall [{recalls}]")
    return 0


# -- parser --------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="serkit",
        description="Speech emotion recognition toolkit: feature extraction, "
                    "training, evaluation, and experiment grids.")
    parser.add_argument("--quiet", action="store_true", help="suppress info logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract per-frame descriptors for a corpus")
    p.add_argument("manifest", help="manifest CSV or WAV directory")
    p.add_argument("--features-dir", required=True, help="output cache directory")
    p.add_argument("--frame-ms", type=int, default=32, choices=(32, 100),
                   help="analysis frame length (default 32)")
    p.add_argument("--filename-rule", default=None,
                   help="regex with named groups for directory manifests")
    p.add_argument("--functional-set", default=None,
                   help="also export utterance vectors (hand_crafted_624 or large)")
    p.add_argument("--skip-existing", action="store_true",
                   help="reuse cached matrices when present")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel files (default: logical cores)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train one model and evaluate on the test split")
    p.add_argument("manifest", help="manifest CSV or WAV directory")
    p.add_argument("--features-dir", required=True)
    p.add_argument("--out", required=True, help="run output directory")
    p.add_argument("--model", default=None, help="model kind")
    p.add_argument("--name", default=None, help="cell name (default: model kind)")
    p.add_argument("--config", default=None,
                   help="JSON file with model/train/features/split sections")
    p.add_argument("--frame-ms", type=int, default=32, choices=(32, 100))
    p.add_argument("--functional-set", default=None)
    p.add_argument("--feature-csv", default=None,
                   help="imported utterance-vector CSV instead of cached features")
    p.add_argument("--expected-dim", type=int, default=None)
    p.add_argument("--filename-rule", default=None)
    p.add_argument("--optimizer", choices=("sgd", "adam"), default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--dropout", type=float, default=None)
    p.add_argument("--split-seed", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="re-evaluate a trained cell directory")
    p.add_argument("cell_dir", help="cell directory holding checkpoint + config")
    p.add_argument("--manifest", default=None, help="override the stored manifest")
    p.add_argument("--features-dir", default=None)
    p.add_argument("--split", choices=("train", "val", "test", "all"), default="test")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grid", help="run an experiment grid from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None,
                   help="parallel cells (default 1)")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("make-toy-corpus", help="generate the synthetic demo corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--clips-per-class", type=int, default=40)
    p.add_argument("--sample-rate", type=int, default=44100)
    p.set_defaults(func=cmd_make_toy_corpus)

    p = sub.add_parser("report", help="print the tables for a finished run directory")
    p.add_argument("run_dir")
    p.add_argument("--json", action="store_true", help="emit merged JSON instead")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SerkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
