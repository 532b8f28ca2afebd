"""Shared fixtures: a session-wide toy corpus with extracted features and
one trained attention model reused by the behavioral suites."""

import time
from pathlib import Path

import numpy as np
import pytest

from serkit.audio import condition_wav
from serkit.grid import run_grid
from serkit.lld import extract_llds
from serkit.manifest import load_manifest
from serkit.toy import make_toy_corpus
from serkit.training import feature_path

# wall-clock seconds per pipeline stage, filled in as fixtures build
STAGE_SECONDS = {}


@pytest.fixture(scope="session")
def pipeline_timings():
    """Stage timings for the session pipeline (corpus, extract, train)."""
    return STAGE_SECONDS


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory):
    """Full default synthetic corpus (5 classes x 40 clips)."""
    root = tmp_path_factory.mktemp("toy_corpus")
    started = time.monotonic()
    manifest_path = make_toy_corpus(root, seed=42)
    STAGE_SECONDS["corpus"] = time.monotonic() - started
    return manifest_path


@pytest.fixture(scope="session")
def toy_features_100(tmp_path_factory, toy_corpus):
    """Cached 100 ms LLD matrices for every toy clip."""
    features_dir = tmp_path_factory.mktemp("toy_features_100")
    started = time.monotonic()
    manifest = load_manifest(toy_corpus)
    for entry in manifest.entries:
        clip = condition_wav(entry.path)
        llds = extract_llds(clip, 100)
        np.save(feature_path(features_dir, entry.path, 100), llds.values)
    STAGE_SECONDS["extract"] = time.monotonic() - started
    return features_dir


@pytest.fixture(scope="session")
def trained_attn_cell(tmp_path_factory, toy_corpus, toy_features_100):
    """One attention model trained on the toy corpus; shared by the
    end-to-end, attention-behavior, and CLI suites."""
    out_dir = tmp_path_factory.mktemp("attn_run")
    config = {
        "manifest": str(toy_corpus),
        "features_dir": str(toy_features_100),
        "split": {"ratios": [0.8, 0.1, 0.1], "seed": 42},
        "train": {"optimizer": "adam", "learning_rate": 2e-3, "batch_size": 16,
                  "max_epochs": 30, "seed": 7, "early_stop_patience": 6,
                  "dropout_rate": 0.0},
        "cells": [
            {"name": "attn", "model": {"kind": "attn_blstm", "hidden": 48,
                                       "attn_dim": 32, "dropout": 0.0},
             "features": {"source": "llds", "frame_ms": 100}},
        ],
    }
    started = time.monotonic()
    result = run_grid(config, out_dir, workers=1)
    STAGE_SECONDS["train"] = time.monotonic() - started
    assert not result.failed, result.cells[0].error
    cell = result.cells[0]
    return {
        "config": config,
        "cell_dir": Path(cell.cell_dir),
        "report": cell.report,
        "run_dir": Path(result.run_dir),
    }
