"""kanhar command line: features, train, eval, gradcheck, synth.

Exit codes: 0 success, 1 failed check, 2 usage/configuration/input error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import pipeline
from .config import ConfigError, load_config
from .dataset import CLASS_NAMES, DataError
from .features import N_FEATURES
from .kan import KanNetwork, load_checkpoint
from .metrics import evaluate, render_metrics_csv, render_report
from .optim import grad_check
from .spline import SplineGrid

log = logging.getLogger("kanhar")


class UsageError(Exception):
    pass


def _config(args):
    return load_config(args.config, args.override, seed=args.seed, out_dir=args.out)


def _datasets(cfg, out: Path):
    """Feature files from ``out`` when present, otherwise rebuilt from the raw data."""
    if (out / pipeline.TRAIN_FEATURES).exists() and (out / pipeline.TEST_FEATURES).exists():
        return pipeline.read_features(out)[:2]
    return pipeline.write_features(cfg, out)[:2]


def cmd_features(args) -> int:
    cfg = _config(args)
    out = Path(cfg.out_dir)
    train_set, test_set, _ = pipeline.write_features(cfg, out)
    for name, data in (("train", train_set), ("test", test_set)):
        counts = pipeline.class_counts(data)
        print(f"{name}: {len(data)} windows, {len(set(data.subjects.tolist()))} subjects")
        for cls, n in counts.items():
            print(f"  {cls:<10} {n}")
    print(f"wrote features to {out}")
    return 0


def cmd_train(args) -> int:
    cfg = _config(args)
    out = Path(cfg.out_dir)
    train_set, _ = _datasets(cfg, out)
    if train_set.features.shape[1] != N_FEATURES:
        raise UsageError(f"feature files have {train_set.features.shape[1]} columns, network expects {N_FEATURES}")
    net, history = pipeline.train_network(cfg, train_set, out)
    last = history.records[-1] if history.records else None
    if last is not None:
        print(f"epoch {last.epoch} ({last.phase}): loss {last.mean_loss:.5f}, train accuracy {last.train_accuracy:.4f}")
    print(f"{net.parameter_count()} trainable parameters; checkpoint written to {out / 'checkpoint.json'}")
    return 0


def cmd_eval(args) -> int:
    cfg = _config(args)
    out = Path(cfg.out_dir)
    ckpt = Path(args.checkpoint) if args.checkpoint else out / "checkpoint.json"
    if not ckpt.exists():
        raise UsageError(f"checkpoint not found: {ckpt}")
    net = load_checkpoint(ckpt)
    _, test_set = _datasets(cfg, out)
    if len(test_set) == 0:
        raise UsageError("test set is empty")
    if net.input_dim != test_set.features.shape[1] or net.output_dim != len(CLASS_NAMES):
        raise UsageError(
            f"checkpoint shape {list(net.shape)} does not match {test_set.features.shape[1]} features "
            f"and {len(CLASS_NAMES)} classes"
        )
    report = evaluate(net, test_set)
    text = render_report(report, CLASS_NAMES)
    subj = pipeline.per_subject_accuracy(net, test_set)
    text += "\nper-subject accuracy\n" + "".join(f"  subject {s:>3}: {a:.4f}\n" for s, a in subj.items())
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(text)
    (out / "metrics.csv").write_text(render_metrics_csv(report, CLASS_NAMES))
    pipeline.write_resolved_config(cfg, out)
    print(text, end="")
    return 0


def cmd_gradcheck(args) -> int:
    grid = SplineGrid(args.grid_size, args.order)
    net = KanNetwork(tuple(args.shape), grid, seed=args.seed or 0)
    rng = np.random.default_rng(args.seed or 0)
    for p in net.parameters():
        p[...] = rng.normal(scale=0.5, size=p.shape)
    x = rng.normal(size=net.input_dim)
    label = int(rng.integers(net.output_dim))
    report = grad_check(net, x, label, step=args.step, tolerance=args.tolerance, inject_fault=args.inject_fault)
    print(
        f"checked {report.n_checked} parameters: max rel error {report.max_rel_error:.3e}, "
        f"mean {report.mean_rel_error:.3e}, tolerance {report.tolerance:.1e}"
    )
    print("PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


def cmd_synth(args) -> int:
    args.override = ["data.source=synthetic", *args.override]
    cfg = _config(args)
    out = Path(cfg.out_dir)
    train_set, test_set, _ = pipeline.write_features(cfg, out)
    net, history = pipeline.train_network(cfg, train_set, out)
    report = evaluate(net, test_set)
    text = render_report(report, CLASS_NAMES)
    (out / "report.txt").write_text(text)
    (out / "metrics.csv").write_text(render_metrics_csv(report, CLASS_NAMES))
    print(text, end="")
    print(f"final test accuracy: {report.accuracy:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kanhar", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")

    for name, fn, help_ in (
        ("features", cmd_features, "extract and standardize features"),
        ("train", cmd_train, "train the KAN classifier"),
        ("eval", cmd_eval, "evaluate a checkpoint on the test subjects"),
        ("synth", cmd_synth, "synthetic end-to-end run"),
    ):
        p = sub.add_parser(name, help=help_)
        common(p)
        p.set_defaults(func=fn)
    sub.choices["eval"].add_argument("--checkpoint")

    p = sub.add_parser("gradcheck", help="finite-difference check of the backward pass")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shape", type=int, nargs="+", default=[5, 4, 3])
    p.add_argument("--grid-size", type=int, default=5)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--step", type=float, default=1e-6)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--inject-fault", action="store_true")
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DataError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
