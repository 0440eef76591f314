"""MotionSense-style recordings, sliding windows, subject-disjoint splits and a
synthetic stand-in dataset."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .features import SignalWindow, feature_matrix

log = logging.getLogger(__name__)

CLASS_NAMES = ("downstairs", "upstairs", "walking", "jogging", "sitting", "standing")
ACTIVITY_CODES = {"dws": 0, "ups": 1, "wlk": 2, "jog": 3, "sit": 4, "std": 5}
DEFAULT_COLUMNS = ("userAcceleration.x", "userAcceleration.y", "userAcceleration.z")
N_SUBJECTS = 24


class DataError(Exception):
    """Raised when input files or split configuration are unusable."""


@dataclass
class Recording:
    subject_id: int
    activity: int
    trial_id: int
    samples: np.ndarray
    dropped_rows: int = 0
    source: str = ""


@dataclass(frozen=True)
class SplitConfig:
    train_subjects: frozenset = frozenset(range(1, 20))
    test_subjects: frozenset = frozenset(range(20, 25))

    def __post_init__(self):
        object.__setattr__(self, "train_subjects", frozenset(int(s) for s in self.train_subjects))
        object.__setattr__(self, "test_subjects", frozenset(int(s) for s in self.test_subjects))
        overlap = self.train_subjects & self.test_subjects
        if overlap:
            raise DataError(f"train and test subjects overlap: {sorted(overlap)}")


@dataclass
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray
    subjects: np.ndarray = field(default=None)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.subjects is None:
            self.subjects = np.zeros(len(self.labels), dtype=np.int64)
        self.subjects = np.asarray(self.subjects, dtype=np.int64)
        if not (len(self.features) == len(self.labels) == len(self.subjects)):
            raise ValueError("features, labels and subjects must have the same number of rows")

    def __len__(self):
        return len(self.labels)

    @classmethod
    def from_windows(cls, windows) -> "LabeledDataset":
        return cls(
            feature_matrix(windows),
            np.array([w.activity for w in windows], dtype=np.int64),
            np.array([w.subject_id for w in windows], dtype=np.int64),
        )


def _parse_trial_dir(name: str) -> tuple[int, int]:
    code, _, trial = name.partition("_")
    if code not in ACTIVITY_CODES:
        raise DataError(f"unknown activity prefix in directory {name!r}")
    try:
        return ACTIVITY_CODES[code], int(trial)
    except ValueError:
        raise DataError(f"cannot parse trial number from directory {name!r}") from None


def _parse_subject(path: Path) -> int:
    stem = path.stem
    if not stem.startswith("sub_"):
        raise DataError(f"{path}: expected a file named sub_<id>")
    try:
        return int(stem[4:])
    except ValueError:
        raise DataError(f"{path}: cannot parse subject id") from None


def load_recordings(root, columns=DEFAULT_COLUMNS, delimiter: str = ",") -> list[Recording]:
    """Read ``<root>/<activity>_<trial>/sub_<id>.csv`` files in sorted path order."""
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"dataset directory not found: {root}")
    files = sorted(p for p in root.glob("*/sub_*") if p.is_file())
    if not files:
        log.warning("no recordings found under %s", root)
        return []
    recordings = []
    total_dropped = 0
    for path in files:
        activity, trial = _parse_trial_dir(path.parent.name)
        subject = _parse_subject(path)
        table = pd.read_csv(path, sep=delimiter)
        missing = [c for c in columns if c not in table.columns]
        if missing:
            raise DataError(f"{path}: missing columns {missing}")
        values = table[list(columns)].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
        finite = np.all(np.isfinite(values), axis=1)
        dropped = int((~finite).sum())
        total_dropped += dropped
        recordings.append(Recording(subject, activity, trial, values[finite], dropped, str(path)))
    if total_dropped:
        log.warning("dropped %d rows with non-finite values", total_dropped)
    return recordings


def window_count(n: int, window_len: int, stride: int) -> int:
    return (n - window_len) // stride + 1 if n >= window_len else 0


def make_windows(recordings, window_len: int = 128, stride: int = 64) -> list[SignalWindow]:
    if window_len < 2 or stride < 1:
        raise ValueError(f"need window_len >= 2 and stride >= 1, got {window_len}, {stride}")
    windows = []
    for rec in recordings:
        for k in range(window_count(len(rec.samples), window_len, stride)):
            start = k * stride
            windows.append(SignalWindow(rec.samples[start : start + window_len], rec.subject_id, rec.activity))
    return windows


def split_by_subject(windows, config: SplitConfig):
    train = [w for w in windows if w.subject_id in config.train_subjects]
    test = [w for w in windows if w.subject_id in config.test_subjects]
    return train, test


# ---------------------------------------------------------------- synthetic data

# amplitude per axis (g) and dominant frequency (Hz) for each synthetic class
SYNTH_AMPLITUDES = np.array(
    [
        [0.30, 0.45, 0.20],
        [0.25, 0.35, 0.40],
        [0.40, 0.25, 0.25],
        [0.90, 0.80, 0.60],
        [0.02, 0.03, 0.02],
        [0.05, 0.02, 0.05],
    ]
)
SYNTH_FREQUENCIES = np.array([1.6, 1.4, 1.8, 2.8, 0.3, 0.5])


def synthetic_recordings(
    class_count: int = 6,
    subjects=range(1, 11),
    trials: int = 2,
    length: int = 640,
    noise: float = 0.02,
    subject_jitter: float = 0.05,
    sample_rate: float = 50.0,
    seed: int = 0,
) -> list[Recording]:
    """Per-class sinusoid families with per-subject amplitude jitter and white noise."""
    if not 1 <= class_count <= len(SYNTH_FREQUENCIES):
        raise ValueError(f"class_count must be in 1..{len(SYNTH_FREQUENCIES)}")
    rng = np.random.default_rng(seed)
    t = np.arange(length) / sample_rate
    recordings = []
    for subject in subjects:
        gain = 1.0 + subject_jitter * rng.uniform(-1.0, 1.0, size=3)
        for c in range(class_count):
            amp = SYNTH_AMPLITUDES[c] * gain
            for trial in range(1, trials + 1):
                phase = rng.uniform(0.0, 2 * np.pi, size=3)
                clean = amp * np.sin(2 * np.pi * SYNTH_FREQUENCIES[c] * t[:, None] + phase)
                samples = clean + noise * rng.standard_normal((length, 3))
                recordings.append(Recording(int(subject), c, trial, samples))
    return recordings


def generate_synthetic(
    class_count: int = 6,
    windows_per_class: int = 20,
    subjects=range(1, 5),
    seed: int = 0,
    window_len: int = 128,
    noise: float = 0.02,
    subject_jitter: float = 0.05,
) -> list[SignalWindow]:
    """Independent synthetic windows, ``windows_per_class`` per class, cycling over subjects."""
    subjects = list(subjects)
    rng = np.random.default_rng(seed)
    gains = {s: 1.0 + subject_jitter * rng.uniform(-1.0, 1.0, size=3) for s in subjects}
    t = np.arange(window_len) / 50.0
    windows = []
    for c in range(class_count):
        if c >= len(SYNTH_FREQUENCIES):
            raise ValueError(f"class_count must be <= {len(SYNTH_FREQUENCIES)}")
        for k in range(windows_per_class):
            subject = subjects[k % len(subjects)]
            phase = rng.uniform(0.0, 2 * np.pi, size=3)
            clean = SYNTH_AMPLITUDES[c] * gains[subject] * np.sin(2 * np.pi * SYNTH_FREQUENCIES[c] * t[:, None] + phase)
            windows.append(SignalWindow(clean + noise * rng.standard_normal((window_len, 3)), subject, c))
    return windows
