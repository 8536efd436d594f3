"""Tests for IoU/DIoU losses, their analytic gradients and the gradient checker."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.append(str(Path(__file__).parent.parent))

from src.geometry.box_ops import diou_penalty, iou  # noqa: E402
from src.losses.box_losses import (  # noqa: E402
    LossKind,
    finite_diff_gradient,
    loss,
    loss_gradient,
)
from src.losses.gradcheck import GradCheckConfig, run_gradcheck, sample_box_pairs  # noqa: E402
from src.models.boxes import Box, CenterBox  # noqa: E402

PRED = Box(0, 0, 2, 2).to_center()
GT = Box(1, 1, 3, 3).to_center()
DISJOINT_PRED = Box(0, 0, 1, 1).to_center()
DISJOINT_GT = Box(2, 0, 3, 1).to_center()


def _random_disjoint_pairs(rng, count):
    produced = 0
    while produced < count:
        cx, cy, gx, gy = rng.uniform(0.0, 20.0, size=4)
        w, h, gw, gh = rng.uniform(0.5, 5.0, size=4)
        pred = CenterBox(float(cx), float(cy), float(w), float(h))
        gt = CenterBox(float(gx), float(gy), float(gw), float(gh))
        if iou(pred.to_box(), gt.to_box()) > 0:
            continue
        produced += 1
        yield pred, gt


def test_loss_kind_parse():
    assert LossKind.parse("DIoU") is LossKind.DIOU
    assert LossKind.parse(" iou ") is LossKind.IOU
    with pytest.raises(ValueError):
        LossKind.parse("giou")


def test_loss_examples():
    for kind in LossKind:
        assert loss(kind, GT, GT) == 0.0
    assert loss(LossKind.IOU, PRED, GT) == pytest.approx(6 / 7)
    assert loss(LossKind.DIOU, PRED, GT) == pytest.approx(6 / 7 + 1 / 9)


def test_loss_rejects_zero_area_ground_truth():
    with pytest.raises(ValueError):
        loss(LossKind.IOU, PRED, CenterBox(1, 1, 0, 2))


def test_gradient_examples():
    same = CenterBox(1, 1, 2, 2)
    grad = loss_gradient(LossKind.IOU, same, same)
    assert grad.d_cx == 0.0 and grad.d_cy == 0.0

    grad = loss_gradient(LossKind.DIOU, DISJOINT_PRED, DISJOINT_GT)
    assert grad.d_cx == pytest.approx(-0.16, abs=1e-12)
    assert grad.d_cy == 0.0

    grad = loss_gradient(LossKind.IOU, DISJOINT_PRED, DISJOINT_GT)
    assert grad.as_tuple() == (0.0, 0.0, 0.0, 0.0)


def test_gradient_rejects_zero_area_prediction():
    with pytest.raises(ValueError):
        loss_gradient(LossKind.DIOU, CenterBox(0, 0, 0, 1), GT)


def test_finite_difference_examples():
    for kind in LossKind:
        numeric = finite_diff_gradient(kind, GT, GT, eps=1e-6)
        # the optimum is a kink in w and h, so only the centers are smooth there
        assert abs(numeric.d_cx) < 1e-6 and abs(numeric.d_cy) < 1e-6

    numeric = finite_diff_gradient(LossKind.DIOU, DISJOINT_PRED, DISJOINT_GT, eps=1e-6)
    assert numeric.d_cx == pytest.approx(-0.16, abs=1e-6)

    analytic = loss_gradient(LossKind.IOU, PRED, GT)
    numeric = finite_diff_gradient(LossKind.IOU, PRED, GT, eps=1e-6)
    for a, f in zip(analytic.as_tuple(), numeric.as_tuple()):
        assert f == pytest.approx(a, rel=1e-5, abs=1e-8)

    with pytest.raises(ValueError):
        finite_diff_gradient(LossKind.IOU, PRED, GT, eps=0.0)


def test_gradcheck_passes_on_random_pairs():
    result = run_gradcheck(GradCheckConfig(samples=1000))
    assert result.samples == 1000
    assert result.passed, result.failures[:3]
    assert result.max_rel_error < 1e-5


def test_gradcheck_degrades_with_large_eps():
    fine = run_gradcheck(GradCheckConfig(samples=200))
    coarse = run_gradcheck(GradCheckConfig(samples=200, eps=1e-1))
    assert coarse.max_rel_error > fine.max_rel_error


def test_gradcheck_with_no_samples_is_vacuous_pass():
    result = run_gradcheck(GradCheckConfig(samples=0))
    assert result.passed
    assert result.samples == 0


def test_sampled_pairs_keep_corner_margin():
    rng = np.random.default_rng(3)
    for pred, gt in sample_box_pairs(rng, 200, margin=1e-2):
        p, g = pred.to_box(), gt.to_box()
        assert min(abs(p.x1 - g.x1), abs(p.x2 - g.x2), abs(p.y1 - g.y1), abs(p.y2 - g.y2)) >= 1e-2


def test_diou_dominates_iou_by_exactly_the_penalty():
    rng = np.random.default_rng(4)
    for pred, gt in sample_box_pairs(rng, 500):
        l_iou = loss(LossKind.IOU, pred, gt)
        l_diou = loss(LossKind.DIOU, pred, gt)
        assert l_diou >= l_iou
        assert l_diou - l_iou == pytest.approx(diou_penalty(pred.to_box(), gt.to_box()), abs=1e-12)
        assert 0.0 <= l_iou <= 1.0
        assert 0.0 <= l_diou < 2.0


def test_losses_are_scale_invariant():
    rng = np.random.default_rng(5)
    for pred, gt in sample_box_pairs(rng, 300):
        s = float(rng.uniform(0.05, 20.0))
        scaled_pred = CenterBox(pred.cx * s, pred.cy * s, pred.w * s, pred.h * s)
        scaled_gt = CenterBox(gt.cx * s, gt.cy * s, gt.w * s, gt.h * s)
        for kind in LossKind:
            assert loss(kind, scaled_pred, scaled_gt) == pytest.approx(loss(kind, pred, gt), rel=1e-9, abs=1e-12)


def test_disjoint_pairs_stall_iou_but_not_diou():
    rng = np.random.default_rng(6)
    for pred, gt in _random_disjoint_pairs(rng, 1000):
        assert loss(LossKind.IOU, pred, gt) == 1.0
        grad_iou = loss_gradient(LossKind.IOU, pred, gt)
        assert grad_iou.d_cx == 0.0 and grad_iou.d_cy == 0.0

        grad_diou = loss_gradient(LossKind.DIOU, pred, gt)
        toward_x, toward_y = gt.cx - pred.cx, gt.cy - pred.cy
        # descent direction is -gradient
        assert -(grad_diou.d_cx * toward_x + grad_diou.d_cy * toward_y) > 0
