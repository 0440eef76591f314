"""Softmax cross-entropy, Adam/AdamW, the two-phase training loop and a
finite-difference gradient checker."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dataset import LabeledDataset
from .kan import KanNetwork

log = logging.getLogger(__name__)


def cross_entropy_loss(scores, label):
    """Returns (loss, d loss / d scores) for one sample or a batch.

    For a batch the loss is the mean over rows and the gradient is scaled to match.
    """
    s = np.asarray(scores, dtype=np.float64)
    single = s.ndim == 1
    s2 = np.atleast_2d(s)
    y = np.atleast_1d(np.asarray(label))
    c = s2.shape[1]
    if y.shape[0] != s2.shape[0]:
        raise ValueError("one label per score row required")
    if np.any(y < 0) or np.any(y >= c) or not np.issubdtype(y.dtype, np.integer):
        raise ValueError(f"labels must be integers in 0..{c - 1}")
    shifted = s2 - s2.max(axis=1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(len(y))
    losses = logz - shifted[rows, y]
    grad = np.exp(shifted - logz[:, None])
    grad[rows, y] -= 1.0
    if single:
        return float(losses[0]), grad[0]
    n = len(y)
    return float(losses.mean()), grad / n


class Adam:
    """Adam with bias-corrected moments; ``weight_decay > 0`` gives decoupled
    (AdamW-style) decay applied directly to the parameters."""

    def __init__(self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.0):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]

    @property
    def kind(self) -> str:
        return "AdamW" if self.weight_decay else "Adam"

    def step(self, grads) -> None:
        grads = list(grads)
        if len(grads) != len(self.params):
            raise ValueError(f"expected {len(self.params)} gradient arrays, got {len(grads)}")
        self.step_count += 1
        t = self.step_count
        c1 = 1.0 - self.beta1**t
        c2 = 1.0 - self.beta2**t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            if g.shape != p.shape:
                raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
            if self.weight_decay:
                p -= self.lr * self.weight_decay * p
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class AdamW(Adam):
    def __init__(self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8, weight_decay=1e-4):
        super().__init__(params, lr, betas, eps, weight_decay)


@dataclass
class TrainConfig:
    pretrain_epochs: int = 60
    finetune_epochs: int = 40
    batch_size: int = 64
    pretrain_lr: float = 1e-3
    finetune_lr: float = 1e-3
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 1e-4
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.pretrain_epochs < 0 or self.finetune_epochs < 0:
            raise ValueError("epoch counts must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.betas = tuple(self.betas)


@dataclass
class EpochRecord:
    epoch: int
    phase: str
    mean_loss: float
    train_accuracy: float


@dataclass
class TrainHistory:
    records: list = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["epoch,phase,mean_loss,train_accuracy"]
        lines += [f"{r.epoch},{r.phase},{r.mean_loss!r},{r.train_accuracy!r}" for r in self.records]
        return "\n".join(lines) + "\n"


def loss_and_grads(net: KanNetwork, x, y):
    scores = net.forward(x)
    loss, g = cross_entropy_loss(scores, y)
    grads, _ = net.backward(x, g)
    return loss, grads, scores


def train(net: KanNetwork, data: LabeledDataset, config: TrainConfig, callback=None):
    """Adam for ``pretrain_epochs`` then a fresh AdamW for ``finetune_epochs``."""
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    if data.features.shape[1] != net.input_dim:
        raise ValueError(f"features have {data.features.shape[1]} columns, network expects {net.input_dim}")
    if data.labels.max() >= net.output_dim:
        raise ValueError("labels exceed the network's class count")

    rng = np.random.default_rng(config.seed)
    history = TrainHistory()
    phases = [
        ("pretrain", config.pretrain_epochs, lambda: Adam(net.parameters(), config.pretrain_lr, config.betas, config.eps)),
        (
            "finetune",
            config.finetune_epochs,
            lambda: AdamW(net.parameters(), config.finetune_lr, config.betas, config.eps, config.weight_decay),
        ),
    ]
    n = len(data)
    epoch = 0
    for phase, n_epochs, make_opt in phases:
        if n_epochs == 0:
            continue
        opt = make_opt()
        for _ in range(n_epochs):
            order = rng.permutation(n) if config.shuffle else np.arange(n)
            total_loss = 0.0
            correct = 0
            for start in range(0, n, config.batch_size):
                idx = order[start : start + config.batch_size]
                loss, grads, scores = loss_and_grads(net, data.features[idx], data.labels[idx])
                opt.step(grads)
                total_loss += loss * len(idx)
                correct += int((scores.argmax(axis=1) == data.labels[idx]).sum())
            rec = EpochRecord(epoch, phase, total_loss / n, correct / n)
            history.records.append(rec)
            log.debug("epoch %d (%s) loss=%.5f acc=%.4f", epoch, phase, rec.mean_loss, rec.train_accuracy)
            if callback is not None:
                callback(net, rec)
            epoch += 1
    return net, history


# ---------------------------------------------------------------- gradient check

@dataclass
class GradCheckReport:
    max_rel_error: float
    mean_rel_error: float
    n_checked: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def relative_error(a, b, floor=1e-4):
    """|a - b| / max(|a|, |b|, floor).

    Central differences at step 1e-6 carry ~1e-9 of rounding noise, so
    gradients smaller than ``floor`` are effectively judged on absolute error.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def grad_check(
    net: KanNetwork,
    x,
    label,
    step: float = 1e-6,
    tolerance: float = 1e-4,
    max_params: int | None = None,
    seed: int = 0,
    inject_fault: bool = False,
    floor: float = 1e-4,
) -> GradCheckReport:
    """Compare analytic loss gradients with central differences.

    ``max_params`` checks a random subset; ``inject_fault`` corrupts the
    analytic gradient of the last bias to exercise the failure path.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=np.float64)
    _, grads, _ = loss_and_grads(net, x, label)
    analytic = np.concatenate([g.ravel() for g in grads])
    if inject_fault:
        analytic[-1] += 1.0

    theta = net.get_flat()
    n = theta.size
    idx = np.arange(n)
    if max_params is not None and max_params < n:
        idx = np.sort(np.random.default_rng(seed).choice(n, max_params, replace=False))
        if inject_fault:
            idx[-1] = n - 1

    numeric = np.empty(len(idx))
    for j, i in enumerate(idx):
        orig = theta[i]
        theta[i] = orig + step
        net.set_flat(theta)
        up = cross_entropy_loss(net.forward(x), label)[0]
        theta[i] = orig - step
        net.set_flat(theta)
        down = cross_entropy_loss(net.forward(x), label)[0]
        theta[i] = orig
        numeric[j] = (up - down) / (2 * step)
    net.set_flat(theta)

    err = relative_error(analytic[idx], numeric, floor)
    return GradCheckReport(float(err.max()), float(err.mean()), len(idx), tolerance)
