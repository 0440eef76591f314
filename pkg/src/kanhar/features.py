"""Per-axis time-domain statistics (12 per axis, 36 per tri-axial window) and
train-fitted standardization."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

FEATURE_NAMES = (
    "mav",
    "std",
    "skew",
    "kurt",
    "entropy",
    "rms",
    "max_abs",
    "p2p",
    "crest",
    "clearance",
    "shape",
    "impulse",
)
AXES = ("x", "y", "z")
COLUMN_NAMES = tuple(f"{axis}_{name}" for axis in AXES for name in FEATURE_NAMES)
N_FEATURES = len(COLUMN_NAMES)
ENTROPY_BINS = 16


@dataclass(frozen=True)
class SignalWindow:
    samples: np.ndarray  # (N, 3)
    subject_id: int
    activity: int
    sample_rate: float = 50.0

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 2 or s.shape[1] != 3:
            raise ValueError(f"window must be N x 3, got shape {s.shape}")
        if s.shape[0] < 2:
            raise ValueError(f"window needs at least 2 samples, got {s.shape[0]}")
        if not np.all(np.isfinite(s)):
            raise ValueError("window contains non-finite samples")
        object.__setattr__(self, "samples", s)


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray  # (36,)
    subject_id: int
    activity: int


def histogram_entropy(x: np.ndarray, bins: int = ENTROPY_BINS) -> float:
    """Shannon entropy (nats) of an equal-width histogram over [min, max]."""
    lo, hi = x.min(), x.max()
    if hi <= lo:
        return 0.0
    idx = np.minimum(((x - lo) / (hi - lo) * bins).astype(np.int64), bins - 1)
    p = np.bincount(idx, minlength=bins) / x.size
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def axis_features(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    lo, hi = x.min(), x.max()
    if lo == hi:
        c = abs(float(lo))
        ratio = 1.0 if c > 0 else 0.0
        return np.array([c, 0.0, 0.0, 0.0, 0.0, c, c, 0.0, ratio, c, ratio, ratio])

    a = np.abs(x)
    mav = a.mean()
    centered = x - x.mean()
    # explicit products: np.power is not exactly odd-symmetric
    sd = np.sqrt(np.mean(centered * centered))
    if sd > 0:
        z = centered / sd
        z2 = z * z
        skew = np.mean(z2 * z)
        kurt = np.mean(z2 * z2) - 3.0
    else:
        skew = kurt = 0.0
    rms = np.sqrt(np.mean(x * x))
    xmax = a.max()
    p2p = hi - lo
    clearance = np.mean(np.sqrt(a)) ** 2
    return np.array(
        [
            mav,
            sd,
            skew,
            kurt,
            histogram_entropy(x),
            rms,
            xmax,
            p2p,
            xmax / rms,
            clearance,
            rms / mav,
            xmax / mav,
        ]
    )


def extract_features(window: SignalWindow) -> FeatureVector:
    values = np.concatenate([axis_features(window.samples[:, j]) for j in range(3)])
    return FeatureVector(values, window.subject_id, window.activity)


def feature_matrix(windows) -> np.ndarray:
    if not windows:
        return np.zeros((0, N_FEATURES))
    return np.stack([extract_features(w).values for w in windows])


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    def transform(self, x):
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std

    def inverse(self, x):
        return np.asarray(x, dtype=np.float64) * self.std + self.mean

    def to_dict(self) -> dict:
        return {"mean": [float(v) for v in self.mean], "std": [float(v) for v in self.std]}

    @classmethod
    def from_dict(cls, doc: dict) -> "Standardizer":
        return cls(np.asarray(doc["mean"], dtype=np.float64), np.asarray(doc["std"], dtype=np.float64))


def fit_standardizer(train) -> Standardizer:
    """Column mean and population std; zero-variance columns get std 1.

    Accepts a list of FeatureVector or a 2-D array.
    """
    if isinstance(train, np.ndarray):
        x = np.asarray(train, dtype=np.float64)
    else:
        x = np.stack([f.values for f in train]) if len(train) else np.zeros((0, 0))
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("cannot fit a standardizer on an empty training set")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    degenerate = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    std = np.where(degenerate, 1.0, std)
    return Standardizer(mean, std)


def apply_standardizer(s: Standardizer, f: FeatureVector) -> FeatureVector:
    return replace(f, values=s.transform(f.values))


# ---------------------------------------------------------------- export

def write_feature_table(path_or_buf, features: np.ndarray, subjects, labels, class_names) -> None:
    rows = [list(COLUMN_NAMES) + ["subject_id", "activity"]]
    for vals, sub, lab in zip(features, subjects, labels):
        rows.append([repr(float(v)) for v in vals] + [str(int(sub)), class_names[int(lab)]])
    text = "\n".join(",".join(r) for r in rows) + "\n"
    if isinstance(path_or_buf, io.TextIOBase):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w", newline="") as fh:
            fh.write(text)


def read_feature_table(path, class_names):
    """Inverse of write_feature_table: returns (features, subjects, labels)."""
    index = {name: i for i, name in enumerate(class_names)}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header[:N_FEATURES]) != COLUMN_NAMES or header[N_FEATURES:] != ["subject_id", "activity"]:
            raise ValueError(f"{path}: unexpected feature table header")
        feats, subs, labs = [], [], []
        for row in reader:
            feats.append([float(v) for v in row[:N_FEATURES]])
            subs.append(int(row[N_FEATURES]))
            labs.append(index[row[N_FEATURES + 1]])
    return (
        np.asarray(feats, dtype=np.float64).reshape(-1, N_FEATURES),
        np.asarray(subs, dtype=np.int64),
        np.asarray(labs, dtype=np.int64),
    )
