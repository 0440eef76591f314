"""Experiment configuration: nested dataclasses loaded from a JSON document with
``key.sub=value`` overrides."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .dataset import DEFAULT_COLUMNS
from .optim import TrainConfig


class ConfigError(Exception):
    pass


@dataclass
class DataConfig:
    source: str = "motionsense"  # or "synthetic"
    root: str = "data/A_DeviceMotion_data"
    columns: list = field(default_factory=lambda: list(DEFAULT_COLUMNS))
    delimiter: str = ","
    window_len: int = 128
    stride: int = 64
    train_subjects: list = field(default_factory=lambda: list(range(1, 20)))
    test_subjects: list = field(default_factory=lambda: list(range(20, 25)))


@dataclass
class SyntheticConfig:
    class_count: int = 6
    subjects: list = field(default_factory=lambda: list(range(1, 25)))
    trials: int = 1
    length: int = 640
    noise: float = 0.02
    subject_jitter: float = 0.05


@dataclass
class ModelConfig:
    hidden: list = field(default_factory=lambda: [64])
    grid_size: int = 5
    order: int = 3
    grid_range: list = field(default_factory=lambda: [-2.0, 2.0])


@dataclass
class PipelineConfig:
    data: DataConfig = field(default_factory=DataConfig)
    synthetic: SyntheticConfig = field(default_factory=SyntheticConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    seed: int = 0
    out_dir: str = "runs/default"
    checkpoint_every: int = 0

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["train"]["betas"] = list(d["train"]["betas"])
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _build(cls, values: dict, where: str):
    if not isinstance(values, dict):
        raise ConfigError(f"{where or 'config'} must be an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(values) - set(fields)
    if unknown:
        raise ConfigError(f"unknown config keys in {where or 'config'}: {sorted(unknown)}")
    kwargs = {}
    for name, value in values.items():
        sub = fields[name].default_factory if fields[name].default_factory is not dataclasses.MISSING else None
        if sub is not None and dataclasses.is_dataclass(sub):
            kwargs[name] = _build(sub, value, f"{where}.{name}".lstrip("."))
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {where or 'config'}: {exc}") from None


def parse_override(text: str):
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"override must look like key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.split("."), value


def load_config(path=None, overrides=(), seed=None, out_dir=None) -> PipelineConfig:
    doc = PipelineConfig().to_dict()
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
        _merge(doc, user, "")
    for text in overrides:
        keys, value = parse_override(text)
        target = doc
        for k in keys[:-1]:
            if not isinstance(target.get(k), dict):
                raise ConfigError(f"unknown config section in override {text!r}")
            target = target[k]
        if keys[-1] not in target:
            raise ConfigError(f"unknown config key in override {text!r}")
        target[keys[-1]] = value
    if seed is not None:
        doc["seed"] = seed
    if out_dir is not None:
        doc["out_dir"] = str(out_dir)
    doc["train"]["seed"] = doc["seed"]
    cfg = _build(PipelineConfig, doc, "")
    validate(cfg)
    return cfg


def _merge(base: dict, update: dict, where: str) -> None:
    if not isinstance(update, dict):
        raise ConfigError(f"{where or 'config'} must be an object")
    for k, v in update.items():
        if k not in base:
            raise ConfigError(f"unknown config key {(where + '.' + k).lstrip('.')!r}")
        if isinstance(base[k], dict):
            _merge(base[k], v, f"{where}.{k}")
        else:
            base[k] = v


def validate(cfg: PipelineConfig) -> None:
    d = cfg.data
    if d.source not in ("motionsense", "synthetic"):
        raise ConfigError(f"data.source must be 'motionsense' or 'synthetic', got {d.source!r}")
    overlap = set(d.train_subjects) & set(d.test_subjects)
    if overlap:
        raise ConfigError(f"train and test subjects overlap: {sorted(overlap)}")
    if len(d.columns) != 3:
        raise ConfigError("data.columns must name exactly three acceleration columns")
    if d.window_len < 2 or d.stride < 1:
        raise ConfigError("need data.window_len >= 2 and data.stride >= 1")
    lo, hi = cfg.model.grid_range
    if not lo < hi:
        raise ConfigError("model.grid_range must be increasing")
    if cfg.model.grid_size < 1 or cfg.model.order < 0:
        raise ConfigError("model.grid_size must be >= 1 and model.order >= 0")
