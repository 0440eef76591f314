"""Synthetic end-to-end experiment over a few seeds.

    python3 scripts/run_synthetic.py --seeds 0 1 2 --out runs/synthetic_sweep
"""

import argparse
import time
from pathlib import Path

from kanhar import pipeline
from kanhar.config import load_config
from kanhar.dataset import CLASS_NAMES
from kanhar.metrics import evaluate, render_metrics_csv, render_report

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=ROOT / "configs" / "synthetic.json")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--out", default="runs/synthetic_sweep")
    args = ap.parse_args()

    rows = []
    for seed in args.seeds:
        out = Path(args.out) / f"seed{seed}"
        cfg = load_config(args.config, seed=seed, out_dir=out)
        t0 = time.perf_counter()
        train_set, test_set, _ = pipeline.write_features(cfg, out)
        net, _ = pipeline.train_network(cfg, train_set, out)
        report = evaluate(net, test_set)
        (out / "report.txt").write_text(render_report(report, CLASS_NAMES))
        (out / "metrics.csv").write_text(render_metrics_csv(report, CLASS_NAMES))
        rows.append((seed, report.accuracy, report.macro["f1"], time.perf_counter() - t0))
        print(f"seed {seed}: accuracy {report.accuracy:.4f}, macro F1 {report.macro['f1']:.4f}, {rows[-1][3]:.1f}s")

    summary = "seed,accuracy,macro_f1,seconds\n" + "".join(f"{s},{a!r},{f!r},{t:.2f}\n" for s, a, f, t in rows)
    Path(args.out).mkdir(parents=True, exist_ok=True)
    (Path(args.out) / "summary.csv").write_text(summary)


if __name__ == "__main__":
    main()
