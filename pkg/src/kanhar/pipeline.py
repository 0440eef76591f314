"""End-to-end stages shared by the CLI and the experiment scripts."""

from __future__ import annotations

import json
import logging
from collections import Counter
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .dataset import (
    CLASS_NAMES,
    DataError,
    LabeledDataset,
    SplitConfig,
    load_recordings,
    make_windows,
    split_by_subject,
    synthetic_recordings,
)
from .features import Standardizer, fit_standardizer, read_feature_table, write_feature_table
from .kan import KanNetwork, save_checkpoint
from .optim import train
from .spline import SplineGrid

log = logging.getLogger(__name__)

TRAIN_FEATURES = "train_features.csv"
TEST_FEATURES = "test_features.csv"
STANDARDIZER = "standardizer.json"
RESOLVED_CONFIG = "config.json"


def recordings_for(cfg: PipelineConfig):
    d = cfg.data
    if d.source == "synthetic":
        s = cfg.synthetic
        return synthetic_recordings(
            class_count=s.class_count,
            subjects=s.subjects,
            trials=s.trials,
            length=s.length,
            noise=s.noise,
            subject_jitter=s.subject_jitter,
            seed=cfg.seed,
        )
    return load_recordings(d.root, d.columns, d.delimiter)


def split_windows(cfg: PipelineConfig):
    split = SplitConfig(cfg.data.train_subjects, cfg.data.test_subjects)
    windows = make_windows(recordings_for(cfg), cfg.data.window_len, cfg.data.stride)
    return split_by_subject(windows, split)


def build_datasets(cfg: PipelineConfig):
    """Windows -> features -> standardization fitted on the training subjects only."""
    train_w, test_w = split_windows(cfg)
    if not train_w:
        raise DataError("no training windows produced; check the dataset path and split")
    train_set = LabeledDataset.from_windows(train_w)
    test_set = LabeledDataset.from_windows(test_w)
    assert not set(train_set.subjects) & set(test_set.subjects)
    scaler = fit_standardizer(train_set.features)
    train_set.features = scaler.transform(train_set.features)
    test_set.features = scaler.transform(test_set.features)
    return train_set, test_set, scaler


def class_counts(data: LabeledDataset) -> dict:
    counts = Counter(int(v) for v in data.labels)
    return {CLASS_NAMES[k]: counts.get(k, 0) for k in range(len(CLASS_NAMES))}


def write_resolved_config(cfg: PipelineConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / RESOLVED_CONFIG).write_text(cfg.dumps())


def write_features(cfg: PipelineConfig, out: Path):
    train_set, test_set, scaler = build_datasets(cfg)
    out.mkdir(parents=True, exist_ok=True)
    write_feature_table(out / TRAIN_FEATURES, train_set.features, train_set.subjects, train_set.labels, CLASS_NAMES)
    write_feature_table(out / TEST_FEATURES, test_set.features, test_set.subjects, test_set.labels, CLASS_NAMES)
    (out / STANDARDIZER).write_text(json.dumps(scaler.to_dict(), indent=1) + "\n")
    write_resolved_config(cfg, out)
    return train_set, test_set, scaler


def read_features(out: Path):
    train = LabeledDataset(*_reorder(read_feature_table(out / TRAIN_FEATURES, CLASS_NAMES)))
    test = LabeledDataset(*_reorder(read_feature_table(out / TEST_FEATURES, CLASS_NAMES)))
    scaler = Standardizer.from_dict(json.loads((out / STANDARDIZER).read_text()))
    return train, test, scaler


def _reorder(table):
    features, subjects, labels = table
    return features, labels, subjects


def build_network(cfg: PipelineConfig, n_features: int, n_classes: int) -> KanNetwork:
    m = cfg.model
    grid = SplineGrid(m.grid_size, m.order, float(m.grid_range[0]), float(m.grid_range[1]))
    return KanNetwork((n_features, *m.hidden, n_classes), grid, cfg.seed)


def train_network(cfg: PipelineConfig, train_set: LabeledDataset, out: Path | None = None):
    net = build_network(cfg, train_set.features.shape[1], len(CLASS_NAMES))
    callback = None
    if out is not None and cfg.checkpoint_every > 0:

        def callback(net, rec):
            if (rec.epoch + 1) % cfg.checkpoint_every == 0:
                save_checkpoint(net, out / f"checkpoint_epoch{rec.epoch + 1:04d}.json")

    net, history = train(net, train_set, cfg.train, callback)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        save_checkpoint(net, out / "checkpoint.json")
        (out / "history.csv").write_text(history.to_csv())
        write_resolved_config(cfg, out)
    return net, history


def per_subject_accuracy(net: KanNetwork, data: LabeledDataset) -> dict:
    pred = np.argmax(net.forward(data.features), axis=1)
    return {int(s): float((pred[data.subjects == s] == data.labels[data.subjects == s]).mean()) for s in np.unique(data.subjects)}
