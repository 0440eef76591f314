"""Confusion matrix, per-class precision/recall/F1 with macro and weighted
averages, and text / CSV renderings of the result."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EvalReport:
    confusion: np.ndarray  # rows: true class, columns: predicted class
    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray

    @property
    def n_classes(self) -> int:
        return self.confusion.shape[0]

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def macro(self) -> dict:
        return {
            "precision": float(self.precision.mean()),
            "recall": float(self.recall.mean()),
            "f1": float(self.f1.mean()),
        }

    @property
    def weighted(self) -> dict:
        w = self.support / self.support.sum()
        return {
            "precision": float(w @ self.precision),
            "recall": float(w @ self.recall),
            "f1": float(w @ self.f1),
        }

    @property
    def micro(self) -> dict:
        cm = self.confusion
        tp = np.diag(cm)
        return {
            "precision": float(tp.sum() / cm.sum(axis=0).sum()),
            "recall": float(tp.sum() / cm.sum(axis=1).sum()),
        }


def _safe_div(num, den):
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den != 0)
    return out


def report_from_confusion(confusion) -> EvalReport:
    cm = np.asarray(confusion, dtype=np.int64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ValueError(f"confusion matrix must be square, got shape {cm.shape}")
    if cm.sum() == 0:
        raise ValueError("confusion matrix is empty")
    tp = np.diag(cm)
    precision = _safe_div(tp, cm.sum(axis=0))
    recall = _safe_div(tp, cm.sum(axis=1))
    f1 = _safe_div(2 * precision * recall, precision + recall)
    return EvalReport(cm, float(tp.sum() / cm.sum()), precision, recall, f1, cm.sum(axis=1))


def confusion_matrix(y_true, y_pred, n_classes: int) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(y_true), np.asarray(y_pred)), 1)
    return cm


def predict(net, features) -> np.ndarray:
    # np.argmax returns the first maximal index, i.e. the lowest class wins ties
    return np.argmax(net.forward(np.atleast_2d(features)), axis=1)


def evaluate(net, data) -> EvalReport:
    if len(data) == 0:
        raise ValueError("cannot evaluate on an empty test set")
    return report_from_confusion(confusion_matrix(data.labels, predict(net, data.features), net.output_dim))


# ---------------------------------------------------------------- rendering

def render_report(report: EvalReport, class_names) -> str:
    names = list(class_names)
    if len(names) != report.n_classes:
        raise ValueError("one class name per confusion row required")
    cm = report.confusion
    corner = "true \\ pred"
    label_w = max(len(corner), len("weighted avg"), *(len(n) for n in names))
    cell_w = max(max(len(n) for n in names), len(str(cm.max())), 5)

    lines = ["Confusion matrix (rows: true, columns: predicted)"]
    lines.append(f"{corner:<{label_w}}" + "".join(f" {n:>{cell_w}}" for n in names))
    for name, row in zip(names, cm):
        lines.append(f"{name:<{label_w}}" + "".join(f" {v:>{cell_w}d}" for v in row))
    lines.append("")
    lines.append(f"{'class':<{label_w}} {'precision':>9} {'recall':>9} {'f1':>9} {'support':>9}")
    for k, name in enumerate(names):
        lines.append(
            f"{name:<{label_w}} {report.precision[k]:9.4f} {report.recall[k]:9.4f} "
            f"{report.f1[k]:9.4f} {int(report.support[k]):9d}"
        )
    lines.append("")
    for label, agg in (("macro avg", report.macro), ("weighted avg", report.weighted)):
        lines.append(
            f"{label:<{label_w}} {agg['precision']:9.4f} {agg['recall']:9.4f} "
            f"{agg['f1']:9.4f} {report.total:9d}"
        )
    lines.append(f"{'accuracy':<{label_w}} {report.accuracy:9.4f}")
    return "\n".join(lines) + "\n"


def render_metrics_csv(report: EvalReport, class_names) -> str:
    """Rows of (metric, class, value); confusion cells use class ``<true>|<pred>``."""
    names = list(class_names)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric", "class", "value"])
    w.writerow(["accuracy", "", repr(report.accuracy)])
    for k, name in enumerate(names):
        w.writerow(["precision", name, repr(float(report.precision[k]))])
        w.writerow(["recall", name, repr(float(report.recall[k]))])
        w.writerow(["f1", name, repr(float(report.f1[k]))])
        w.writerow(["support", name, int(report.support[k])])
    for prefix, agg in (("macro", report.macro), ("weighted", report.weighted)):
        for key, val in agg.items():
            w.writerow([f"{prefix}_{key}", "", repr(val)])
    for i, true_name in enumerate(names):
        for j, pred_name in enumerate(names):
            w.writerow(["confusion", f"{true_name}|{pred_name}", int(report.confusion[i, j])])
    return buf.getvalue()


def parse_metrics_csv(text: str, class_names) -> EvalReport:
    index = {n: i for i, n in enumerate(class_names)}
    cm = np.zeros((len(index), len(index)), dtype=np.int64)
    for row in csv.DictReader(io.StringIO(text)):
        if row["metric"] == "confusion":
            t, p = row["class"].split("|")
            cm[index[t], index[p]] = int(row["value"])
    return report_from_confusion(cm)
