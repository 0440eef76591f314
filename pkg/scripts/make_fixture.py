"""Write the small MotionSense-layout fixture tree used by the test suite.

    python scripts/make_fixture.py [out_dir]

Two subjects, one trial per activity, all 12 device-motion columns.  Row
counts follow ``fixture_length`` so tests can recompute window counts.
"""

import sys
from pathlib import Path

import numpy as np
import pandas as pd

TRIALS = {"dws": 1, "ups": 3, "wlk": 7, "jog": 9, "sit": 5, "std": 6}
COLUMNS = [
    "attitude.roll", "attitude.pitch", "attitude.yaw",
    "gravity.x", "gravity.y", "gravity.z",
    "rotationRate.x", "rotationRate.y", "rotationRate.z",
    "userAcceleration.x", "userAcceleration.y", "userAcceleration.z",
]
AMPLITUDE = {"dws": 0.35, "ups": 0.3, "wlk": 0.4, "jog": 0.9, "sit": 0.02, "std": 0.04}


def fixture_length(activity_index: int, subject: int) -> int:
    return 200 + 37 * activity_index + 11 * subject


def main(out_dir="tests/fixtures/motionsense_mini"):
    out = Path(out_dir)
    rng = np.random.default_rng(2024)
    t_step = 1 / 50
    for a, (code, trial) in enumerate(TRIALS.items()):
        d = out / f"{code}_{trial}"
        d.mkdir(parents=True, exist_ok=True)
        for subject in (1, 2):
            n = fixture_length(a, subject)
            t = np.arange(n) * t_step
            data = 0.1 * rng.standard_normal((n, 12))
            data[:, 9:] += AMPLITUDE[code] * np.sin(2 * np.pi * (1 + a / 3) * t[:, None] + rng.uniform(0, 6, 3))
            frame = pd.DataFrame(np.round(data, 6), columns=COLUMNS)
            frame.to_csv(d / f"sub_{subject}.csv", index=True, float_format="%.6f")


if __name__ == "__main__":
    main(*sys.argv[1:])
