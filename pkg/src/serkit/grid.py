"""Experiment grid: run (feature source, model kind) cells over one corpus
split and render the results side by side.

A grid config is a plain dict (usually loaded from JSON):

    {
      "manifest": "corpus/manifest.csv",
      "filename_rule": null,
      "features_dir": "features/",
      "split": {"ratios": [0.8, 0.1, 0.1], "seed": 42, "speaker_disjoint": false},
      "train": {"optimizer": "adam", "learning_rate": 1e-3, ...},
      "cells": [
        {"name": "blstm_32ms", "model": {"kind": "blstm"},
         "features": {"source": "llds", "frame_ms": 32}},
        {"name": "dnn_624", "model": {"kind": "dnn_func"},
         "features": {"source": "functionals", "frame_ms": 100, "set": "hand_crafted_624"}},
        {"name": "svm_ext", "model": {"kind": "svm_func"},
         "features": {"source": "csv", "path": "vectors.csv", "expected_dim": 1582}}
      ]
    }

Cells run independently; a failing cell is recorded and the rest
continue. Every run directory is named by a digest of the resolved
config, so reruns of the same config land in the same place.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigInvalid, DuplicatePath, FeatureMissing
from .functionals import apply_functionals, get_builtin_set, import_feature_csv
from .lld import FEATURE_NAMES, LldMatrix
from .manifest import Manifest, load_manifest, split
from .metrics import EvalReport, compute_metrics
from .models import ModelSpec, build
from .nn import TrainConfig, backend_name, load_checkpoint, save_checkpoint
from .svm import svm_train
from .training import (
    Standardizer,
    evaluate_model,
    load_cached_llds,
    train_model,
)

log = logging.getLogger("serkit.grid")


def config_hash(config: dict) -> str:
    """Stable 12-hex digest of a JSON-serializable config."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


def _feature_desc(fcfg: dict) -> str:
    source = fcfg.get("source")
    if source == "llds":
        return f"llds@{fcfg['frame_ms']}ms"
    if source == "functionals":
        return f"{fcfg['set']}@{fcfg['frame_ms']}ms"
    if source == "csv":
        return f"csv:{Path(fcfg['path']).name}"
    return str(source)


def resolve_features(manifest: Manifest, fcfg: dict, features_dir):
    """Materialize one feature array row per manifest entry.

    Returns (X, input_shape) where input_shape is what models.build
    expects: (frames, n_llds) for the llds source, a flat dimension for
    functional vectors and imported CSVs.
    """
    source = fcfg.get("source")
    if source == "llds":
        frame_ms = int(fcfg["frame_ms"])
        x = load_cached_llds(features_dir, manifest, frame_ms)
        return x, (x.shape[1], x.shape[2])
    if source == "functionals":
        frame_ms = int(fcfg["frame_ms"])
        fset = get_builtin_set(fcfg["set"])
        mats = load_cached_llds(features_dir, manifest, frame_ms)
        rows = []
        for entry, mat in zip(manifest.entries, mats):
            lld = LldMatrix(values=mat, feature_names=FEATURE_NAMES,
                            frame_ms=frame_ms, clip_id=Path(entry.path).stem)
            rows.append(apply_functionals(lld, fset).values)
        x = np.stack(rows)
        return x, x.shape[1]
    if source == "csv":
        vectors = import_feature_csv(fcfg["path"], fcfg.get("expected_dim"))
        by_id = {}
        for vec in vectors:
            if vec.clip_id in by_id:
                raise DuplicatePath(f"{fcfg['path']}: duplicate clip_id {vec.clip_id}")
            by_id[vec.clip_id] = vec.values
        rows = []
        for entry in manifest.entries:
            stem = Path(entry.path).stem
            if stem not in by_id:
                raise FeatureMissing(f"{fcfg['path']} has no row for clip {stem}")
            rows.append(by_id[stem])
        x = np.stack(rows)
        return x, x.shape[1]
    raise ConfigInvalid(f"unknown feature source {source!r}")


@dataclass
class CellResult:
    name: str
    model_kind: str
    feature_desc: str
    ok: bool
    report: Optional[EvalReport] = None
    error: Optional[str] = None
    cell_dir: Optional[str] = None


@dataclass
class GridResult:
    run_dir: str
    cells: list = field(default_factory=list)

    @property
    def failed(self):
        return [c for c in self.cells if not c.ok]


def _write_history(path, history):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "train_wa", "val_ua", "val_wa"])
        for row in history:
            writer.writerow([row["epoch"], repr(float(row["train_loss"])),
                             repr(float(row["train_wa"])), repr(float(row["val_ua"])),
                             repr(float(row["val_wa"]))])


def run_cell(cell_cfg: dict, splits, features_dir, train_cfg: TrainConfig,
             cell_dir: Path, extra_metadata: Optional[dict] = None,
             context: Optional[dict] = None) -> CellResult:
    """Train and evaluate one grid cell; artifacts land under cell_dir.

    context (manifest path, split settings, features_dir) is embedded in
    the cell's config.json so `serkit eval` can reconstruct the run.
    """
    name = cell_cfg.get("name") or cell_cfg["model"]["kind"]
    spec = ModelSpec.from_dict(cell_cfg["model"])
    fcfg = cell_cfg["features"]
    desc = _feature_desc(fcfg)
    man_train, man_val, man_test = splits

    x_train, input_shape = resolve_features(man_train, fcfg, features_dir)
    x_val, _ = resolve_features(man_val, fcfg, features_dir)
    x_test, _ = resolve_features(man_test, fcfg, features_dir)
    y_train, y_val, y_test = (m.labels() for m in (man_train, man_val, man_test))

    cell_dir.mkdir(parents=True, exist_ok=True)
    metadata = {
        "cell": name, "model_kind": spec.kind, "features": desc,
        "seed": train_cfg.seed, "backend": backend_name(),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    metadata.update(extra_metadata or {})

    if spec.kind == "svm_func":
        model = svm_train(x_train, y_train, c=spec.svm_c)
        predicted = model.predict(x_test)
        report = compute_metrics(y_test, predicted, run_metadata=metadata)
        save_checkpoint(cell_dir / "checkpoint.bin", {
            "svm.weights": model.weights, "svm.biases": model.biases,
            "svm.feature_mean": model.feature_mean,
            "svm.feature_scale": model.feature_scale,
        })
        history = []
    else:
        std = Standardizer.fit(x_train)
        model = build(spec, input_shape, seed=train_cfg.seed)
        result = train_model(model, std.transform(x_train), y_train,
                             std.transform(x_val), y_val, train_cfg)
        metadata["best_epoch"] = result.best_epoch
        report = evaluate_model(model, std.transform(x_test), y_test,
                                train_cfg.batch_size, run_metadata=metadata)
        save_checkpoint(cell_dir / "checkpoint.bin",
                        {**model.net.state_dict(), **std.state_tensors()})
        history = result.history
    _write_history(cell_dir / "history.csv", history)

    resolved = {
        "name": name, "model": spec.to_dict(), "features": fcfg,
        "train": train_cfg.to_dict(),
        "input_shape": list(input_shape) if isinstance(input_shape, tuple) else input_shape,
        "context": context or {},
    }
    (cell_dir / "config.json").write_text(
        json.dumps(resolved, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (cell_dir / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    return CellResult(name=name, model_kind=spec.kind, feature_desc=desc,
                      ok=True, report=report, cell_dir=str(cell_dir))


def render_table(cells) -> str:
    """Fixed-width comparison table, one row per cell in config order."""
    headers = ("cell", "model", "features", "UA", "WA")
    rows = []
    for c in cells:
        if c.ok:
            rows.append((c.name, c.model_kind, c.feature_desc,
                         f"{c.report.ua:.2f}", f"{c.report.wa:.2f}"))
        else:
            first_line = (c.error or "failed").strip().splitlines()[-1]
            rows.append((c.name, c.model_kind, c.feature_desc,
                         "FAILED", first_line[:60]))
    widths = [max(len(headers[i]), *(len(r[i]) for r in rows)) if rows
              else len(headers[i]) for i in range(5)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
             "  ".join("-" * widths[i] for i in range(5))]
    for r in rows:
        lines.append("  ".join(r[i].ljust(widths[i]) for i in range(5)))
    return "\n".join(lines) + "\n"


def render_table_csv(cells) -> str:
    lines = ["cell,model,features,ua,wa,error"]
    for c in cells:
        if c.ok:
            lines.append(f"{c.name},{c.model_kind},{c.feature_desc},"
                         f"{c.report.ua:.4f},{c.report.wa:.4f},")
        else:
            msg = (c.error or "failed").strip().splitlines()[-1].replace(",", ";")
            lines.append(f"{c.name},{c.model_kind},{c.feature_desc},,,{msg}")
    return "\n".join(lines) + "\n"


def _validate_grid_config(config: dict):
    for key in ("manifest", "features_dir", "cells"):
        if key not in config:
            raise ConfigInvalid(f"grid config missing {key!r}")
    if not isinstance(config["cells"], list) or not config["cells"]:
        raise ConfigInvalid("grid config needs a non-empty cells list")
    names = []
    for cell in config["cells"]:
        if "model" not in cell or "features" not in cell:
            raise ConfigInvalid(f"cell {cell.get('name')!r} needs model and features")
        names.append(cell.get("name") or cell["model"].get("kind"))
    if len(set(names)) != len(names):
        raise ConfigInvalid(f"cell names must be unique, got {names}")


def run_grid(config: dict, out_dir, workers=1) -> GridResult:
    """Execute every cell of a grid config; returns per-cell results.

    Failures are isolated per cell. The rendered comparison table and the
    merged report list are written under out_dir/run-<config digest>/.
    """
    _validate_grid_config(config)
    split_cfg = config.get("split", {})
    train_cfg = TrainConfig.from_dict(config.get("train", {}))
    manifest = load_manifest(config["manifest"], config.get("filename_rule"))
    splits = split(manifest,
                   ratios=tuple(split_cfg.get("ratios", (0.8, 0.1, 0.1))),
                   seed=split_cfg.get("seed", 42),
                   speaker_disjoint=split_cfg.get("speaker_disjoint", False))

    digest = config_hash(config)
    run_dir = Path(out_dir) / f"run-{digest}"
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "grid_config.json").write_text(
        json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    context = {
        "manifest": str(config["manifest"]),
        "filename_rule": config.get("filename_rule"),
        "features_dir": str(config["features_dir"]),
        "split": {
            "ratios": list(split_cfg.get("ratios", (0.8, 0.1, 0.1))),
            "seed": split_cfg.get("seed", 42),
            "speaker_disjoint": split_cfg.get("speaker_disjoint", False),
        },
    }

    def _one(cell_cfg):
        name = cell_cfg.get("name") or cell_cfg["model"]["kind"]
        try:
            return run_cell(cell_cfg, splits, config["features_dir"], train_cfg,
                            run_dir / f"cell-{name}",
                            extra_metadata={"config_hash": digest},
                            context=context)
        except Exception as exc:
            log.error("cell %s failed: %s", name, exc)
            return CellResult(
                name=name, model_kind=cell_cfg["model"].get("kind", "?"),
                feature_desc=_feature_desc(cell_cfg["features"]), ok=False,
                error=traceback.format_exc())

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_one, config["cells"]))
    else:
        cells = [_one(c) for c in config["cells"]]

    table = render_table(cells)
    (run_dir / "table.txt").write_text(table, encoding="utf-8")
    (run_dir / "table.csv").write_text(render_table_csv(cells), encoding="utf-8")
    for cell in cells:
        if not cell.ok:
            (run_dir / f"cell-{cell.name}.error.txt").write_text(
                cell.error or "", encoding="utf-8")
    return GridResult(run_dir=str(run_dir), cells=cells)


def load_cell_model(cell_dir):
    """Rebuild a trained cell (model + standardizer) from its artifacts."""
    cell_dir = Path(cell_dir)
    cfg = json.loads((cell_dir / "config.json").read_text(encoding="utf-8"))
    spec = ModelSpec.from_dict(cfg["model"])
    tensors = load_checkpoint(cell_dir / "checkpoint.bin")
    if spec.kind == "svm_func":
        from .svm import SvmModel
        model = SvmModel(weights=tensors["svm.weights"],
                         biases=tensors["svm.biases"],
                         feature_mean=tensors["svm.feature_mean"],
                         feature_scale=tensors["svm.feature_scale"],
                         c=spec.svm_c)
        return spec, model, None, cfg
    shape = cfg["input_shape"]
    input_shape = tuple(shape) if isinstance(shape, list) else shape
    model = build(spec, input_shape, seed=cfg["train"]["seed"])
    std = Standardizer.from_state(tensors)
    model.net.load_state_dict(tensors)
    return spec, model, std, cfg
