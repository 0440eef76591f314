import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from kanhar.dataset import LabeledDataset
from kanhar.kan import KanNetwork
from kanhar.optim import Adam, AdamW, TrainConfig, cross_entropy_loss, grad_check, train
from kanhar.spline import SplineGrid


def test_loss_uniform_scores():
    loss, grad = cross_entropy_loss(np.zeros(6), 2)
    assert loss == pytest.approx(math.log(6))
    expected = np.full(6, 1 / 6)
    expected[2] -= 1
    np.testing.assert_allclose(grad, expected, atol=1e-15)


def test_loss_confident():
    loss, _ = cross_entropy_loss(np.array([10.0, -10.0]), 0)
    assert loss == pytest.approx(math.log1p(math.exp(-20)), rel=1e-12)
    assert loss == pytest.approx(2.06e-9, rel=1e-3)


def test_loss_large_scores_stable():
    loss, grad = cross_entropy_loss(np.array([1000.0, 0.0, -1000.0]), 1)
    assert loss == pytest.approx(1000.0) and np.all(np.isfinite(grad))


def test_loss_bad_label():
    with pytest.raises(ValueError):
        cross_entropy_loss(np.zeros(3), 3)
    with pytest.raises(ValueError):
        cross_entropy_loss(np.zeros(3), -1)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_loss_gradient_fd(seed, c):
    rng = np.random.default_rng(seed)
    s = rng.normal(scale=3, size=c)
    y = int(rng.integers(c))
    loss, grad = cross_entropy_loss(s, y)
    assert loss >= 0
    assert abs(grad.sum()) < 1e-12
    h = 1e-6
    fd = np.array([(cross_entropy_loss(s + h * e, y)[0] - cross_entropy_loss(s - h * e, y)[0]) / (2 * h) for e in np.eye(c)])
    err = np.abs(fd - grad) / np.maximum(np.abs(grad), 1e-3)
    assert err.max() < 1e-6


def test_batch_loss_is_mean():
    s = np.array([[1.0, 2.0], [0.5, -0.5]])
    y = np.array([0, 1])
    loss, grad = cross_entropy_loss(s, y)
    l0, g0 = cross_entropy_loss(s[0], 0)
    l1, g1 = cross_entropy_loss(s[1], 1)
    assert loss == pytest.approx((l0 + l1) / 2)
    np.testing.assert_allclose(grad, np.stack([g0, g1]) / 2)


def test_adam_zero_gradient():
    p = np.array([1.0, -2.0, 3.0])
    opt = Adam([p], lr=0.1)
    for _ in range(3):
        opt.step([np.zeros(3)])
    np.testing.assert_array_equal(p, [1.0, -2.0, 3.0])


def test_adamw_zero_gradient_decay():
    p = np.array([1.0, -2.0, 3.0])
    opt = AdamW([p], lr=0.001, weight_decay=0.01)
    opt.step([np.zeros(3)])
    np.testing.assert_allclose(p, np.array([1.0, -2.0, 3.0]) * (1 - 1e-5), rtol=1e-15)
    assert opt.kind == "AdamW"


def test_adam_first_step():
    # t=1: m_hat = g, v_hat = g^2, so the move is lr * g / (|g| + eps)
    p = np.array([0.0])
    Adam([p], lr=0.1).step([np.array([1.0])])
    assert p[0] == pytest.approx(-0.1 / (1 + 1e-8), rel=1e-12)


def test_adam_matches_hand_recurrence():
    rng = np.random.default_rng(0)
    gs = rng.normal(size=(5, 2))
    p = np.array([0.5, -0.5])
    opt = Adam([p], lr=0.01)
    ref = np.array([0.5, -0.5])
    m = v = np.zeros(2)
    for t, g in enumerate(gs, start=1):
        opt.step([g])
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        ref = ref - 0.01 * (m / (1 - 0.9**t)) / (np.sqrt(v / (1 - 0.999**t)) + 1e-8)
    np.testing.assert_allclose(p, ref, rtol=1e-13)


def test_adam_shape_mismatch():
    opt = Adam([np.zeros(3)])
    with pytest.raises(ValueError):
        opt.step([np.zeros(2)])
    with pytest.raises(ValueError):
        opt.step([np.zeros(3), np.zeros(3)])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_adam_scale_invariance(seed):
    rng = np.random.default_rng(seed)
    gs = rng.normal(size=(4, 5)) + 0.5
    assume(np.abs(gs).min() > 1e-2)  # keep eps negligible next to sqrt(v_hat)
    p1, p2 = np.zeros(5), np.zeros(5)
    o1, o2 = Adam([p1], lr=0.01), Adam([p2], lr=0.01)
    for g in gs:
        o1.step([g])
        o2.step([10 * g])
    np.testing.assert_allclose(p1, p2, atol=1e-6)


def separable(n=120, seed=0, d=6):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d))
    y = (x[:, 0] + 0.5 * x[:, 1] > 0).astype(np.int64)
    x[:, 0] += np.where(y == 1, 0.5, -0.5)
    return LabeledDataset(x, y, np.zeros(n))


def test_train_zero_epochs_is_noop():
    net = KanNetwork((6, 4, 2), seed=0)
    before = net.get_flat().copy()
    _, hist = train(net, separable(), TrainConfig(0, 0))
    assert hist.records == []
    np.testing.assert_array_equal(net.get_flat(), before)


def test_train_deterministic():
    cfg = TrainConfig(3, 2, batch_size=16, seed=5)
    a, ha = train(KanNetwork((6, 4, 2), seed=1), separable(), cfg)
    b, hb = train(KanNetwork((6, 4, 2), seed=1), separable(), cfg)
    assert a.get_flat().tobytes() == b.get_flat().tobytes()
    assert ha.to_csv() == hb.to_csv()


def test_train_reaches_high_accuracy_and_lowers_loss():
    net = KanNetwork((6, 4, 2), SplineGrid(5, 3), seed=0)
    _, hist = train(net, separable(), TrainConfig(60, 40, batch_size=16, pretrain_lr=1e-2, finetune_lr=1e-2))
    assert hist.records[-1].mean_loss < hist.records[0].mean_loss
    assert hist.records[-1].train_accuracy >= 0.99
    assert [r.phase for r in hist.records] == ["pretrain"] * 60 + ["finetune"] * 40


def test_phase_contract():
    data = separable()
    base = dict(pretrain_epochs=4, batch_size=32, seed=3)
    a, ha = train(KanNetwork((6, 4, 2), seed=0), data, TrainConfig(finetune_epochs=0, **base))
    b, hb = train(
        KanNetwork((6, 4, 2), seed=0), data, TrainConfig(finetune_epochs=3, finetune_lr=0.5, weight_decay=0.3, **base)
    )
    assert ha.to_csv().splitlines()[1:5] == hb.to_csv().splitlines()[1:5]
    assert hb.records[-1].phase == "finetune"


def test_train_errors():
    with pytest.raises(ValueError):
        train(KanNetwork((6, 2)), LabeledDataset(np.zeros((0, 6)), np.zeros(0)), TrainConfig(1, 0))
    with pytest.raises(ValueError):
        train(KanNetwork((5, 2)), separable(), TrainConfig(1, 0))
    with pytest.raises(ValueError):
        TrainConfig(batch_size=0)


def random_net(seed=0):
    net = KanNetwork((5, 4, 3), seed=seed)
    rng = np.random.default_rng(seed)
    for p in net.parameters():
        p[...] = rng.normal(scale=0.5, size=p.shape)
    return net, rng.normal(size=5), int(rng.integers(3))


def test_grad_check_passes():
    net, x, y = random_net(0)
    rep = grad_check(net, x, y, step=1e-6, tolerance=1e-4)
    assert rep.passed and rep.max_rel_error < 1e-4
    assert rep.n_checked == net.parameter_count()


def test_grad_check_restores_parameters():
    net, x, y = random_net(1)
    before = net.get_flat().copy()
    grad_check(net, x, y)
    assert net.get_flat().tobytes() == before.tobytes()


def test_grad_check_detects_fault():
    net, x, y = random_net(2)
    rep = grad_check(net, x, y, inject_fault=True)
    assert not rep.passed and rep.max_rel_error > 1e-4
    rep = grad_check(net, x, y, inject_fault=True, max_params=20)
    assert not rep.passed


def test_grad_check_zero_net():
    net = KanNetwork((5, 4, 3), seed=0)
    for p in net.parameters():
        p[...] = 0.0
    rep = grad_check(net, np.linspace(-1, 1, 5), 1)
    assert rep.mean_rel_error < 1e-6


def test_grad_check_tolerance_floor():
    net, x, y = random_net(3)
    assert not grad_check(net, x, y, tolerance=1e-12).passed
