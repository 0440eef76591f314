"""Full MotionSense run (features, training, evaluation) under configs/motionsense.json.

Expects the DeviceMotion release unpacked at data/A_DeviceMotion_data, or pass --root.
"""

import argparse
import json
import sys
from pathlib import Path

from kanhar.cli import main as cli_main

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--root", default=None, help="A_DeviceMotion_data directory")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/motionsense")
    args = ap.parse_args()

    common = ["--config", str(ROOT / "configs" / "motionsense.json"), "--seed", str(args.seed), "--out", args.out]
    if args.root:
        common += ["--override", f"data.root={json.dumps(args.root)}"]
    for cmd in ("features", "train", "eval"):
        code = cli_main([cmd, *common])
        if code:
            sys.exit(code)


if __name__ == "__main__":
    main()
