"""Unit tests for box types and box algebra."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.append(str(Path(__file__).parent.parent))

from src.geometry.box_ops import (  # noqa: E402
    center_distance_sq,
    diou_metric,
    diou_penalty,
    enclosing_box,
    enclosing_diagonal_sq,
    intersection_area,
    iou,
)
from src.models.boxes import Box, CenterBox  # noqa: E402

OVERLAP_A = Box(0, 0, 2, 2)
OVERLAP_B = Box(1, 1, 3, 3)
DISJOINT_A = Box(0, 0, 1, 1)
DISJOINT_B = Box(2, 0, 3, 1)


def test_box_rejects_inverted_and_non_finite_corners():
    with pytest.raises(ValueError):
        Box(2, 0, 1, 1)
    with pytest.raises(ValueError):
        Box(0, 0, float("nan"), 1)
    assert Box(1, 1, 1, 1).area == 0


def test_center_box_conversions():
    assert CenterBox(30, 50, 40, 60).to_box() == Box(10, 20, 50, 80)
    assert Box(10, 20, 50, 80).to_center() == CenterBox(30, 50, 40, 60)
    with pytest.raises(ValueError):
        CenterBox(0, 0, -1, 1)


def test_iou_examples():
    assert iou(Box(0, 0, 1, 1), Box(0, 0, 1, 1)) == 1.0
    assert iou(OVERLAP_A, OVERLAP_B) == pytest.approx(1 / 7)
    assert iou(DISJOINT_A, DISJOINT_B) == 0.0


def test_iou_touching_edges_and_degenerate_boxes():
    assert iou(Box(0, 0, 1, 1), Box(1, 0, 2, 1)) == 0.0
    assert iou(Box(1, 1, 1, 1), Box(1, 1, 1, 1)) == 0.0


def test_enclosing_diagonal_examples():
    assert enclosing_diagonal_sq(Box(0, 0, 3, 4), Box(0, 0, 3, 4)) == 25.0
    assert enclosing_diagonal_sq(OVERLAP_A, OVERLAP_B) == 18.0
    assert enclosing_diagonal_sq(DISJOINT_A, DISJOINT_B) == 10.0
    assert enclosing_box(DISJOINT_A, DISJOINT_B) == Box(0, 0, 3, 1)


def test_center_distance_examples():
    assert center_distance_sq(OVERLAP_A, OVERLAP_A) == 0.0
    assert center_distance_sq(OVERLAP_A, OVERLAP_B) == 2.0
    assert center_distance_sq(DISJOINT_A, DISJOINT_B) == 4.0


def test_diou_penalty_and_metric_examples():
    assert diou_penalty(Box(0, 0, 4, 4), Box(1, 1, 3, 3)) == 0.0
    assert diou_penalty(OVERLAP_A, OVERLAP_B) == pytest.approx(2 / 18)
    assert diou_penalty(DISJOINT_A, DISJOINT_B) == pytest.approx(0.4)
    assert diou_metric(OVERLAP_A, OVERLAP_A) == 1.0
    assert diou_metric(OVERLAP_A, OVERLAP_B) == pytest.approx(1 / 7 - 1 / 9)
    assert diou_metric(DISJOINT_A, DISJOINT_B) == pytest.approx(-0.4)


def test_diou_penalty_zero_when_both_boxes_are_one_point():
    point = Box(5, 5, 5, 5)
    assert diou_penalty(point, point) == 0.0


def _random_integer_box(rng, canvas=20):
    x1, x2 = sorted(rng.integers(0, canvas + 1, size=2))
    y1, y2 = sorted(rng.integers(0, canvas + 1, size=2))
    return Box(float(x1), float(y1), float(x2), float(y2))


def _mask(box, canvas=20):
    grid = np.zeros((canvas, canvas), dtype=bool)
    grid[int(box.y1):int(box.y2), int(box.x1):int(box.x2)] = True
    return grid


def test_iou_matches_pixel_count_oracle():
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        a = _random_integer_box(rng)
        b = _random_integer_box(rng)
        ma, mb = _mask(a), _mask(b)
        inter = int(np.count_nonzero(ma & mb))
        union = int(np.count_nonzero(ma | mb))
        expected = inter / union if union else 0.0
        assert intersection_area(a, b) == inter
        assert iou(a, b) == expected


def test_symmetry_bounds_and_translation_invariance():
    rng = np.random.default_rng(1)
    for _ in range(2000):
        a = _random_integer_box(rng)
        b = _random_integer_box(rng)
        value = iou(a, b)
        assert value == iou(b, a)
        assert 0.0 <= value <= 1.0
        assert 0.0 <= diou_penalty(a, b) <= 1.0
        assert diou_metric(a, b) <= value
        dx, dy = (float(v) for v in rng.integers(-50, 50, size=2))
        assert iou(a.translate(dx, dy), b.translate(dx, dy)) == value
        assert diou_penalty(a.translate(dx, dy), b.translate(dx, dy)) == diou_penalty(a, b)


def _random_continuous_box(rng):
    x1, y1 = rng.uniform(-100.0, 100.0, size=2)
    w, h = rng.uniform(0.01, 50.0, size=2)
    return Box(float(x1), float(y1), float(x1 + w), float(y1 + h))


def test_continuous_pairs_symmetry_containment_and_translation():
    rng = np.random.default_rng(3)
    for _ in range(10_000):
        a = _random_continuous_box(rng)
        b = _random_continuous_box(rng)
        e = enclosing_box(a, b)
        assert e.x1 <= min(a.x1, b.x1) and e.y1 <= min(a.y1, b.y1)
        assert e.x2 >= max(a.x2, b.x2) and e.y2 >= max(a.y2, b.y2)
        assert enclosing_diagonal_sq(a, b) == pytest.approx(e.width ** 2 + e.height ** 2)

        ops = (iou, enclosing_diagonal_sq, center_distance_sq, diou_penalty, diou_metric)
        values = [op(a, b) for op in ops]
        assert values == [op(b, a) for op in ops]

        penalty = values[3]
        # strict for boxes with area; two distinct points reach exactly 1
        assert 0.0 <= penalty < 1.0
        assert 0.0 <= values[0] <= 1.0
        assert values[4] <= values[0]

        dx, dy = (float(v) for v in rng.uniform(-100.0, 100.0, size=2))
        moved_a, moved_b = a.translate(dx, dy), b.translate(dx, dy)
        for op, value in zip(ops, values):
            assert op(moved_a, moved_b) == pytest.approx(value, rel=0, abs=1e-9)


def test_penalty_reaches_one_only_for_distinct_points():
    assert diou_penalty(Box(0, 0, 0, 0), Box(3, 4, 3, 4)) == 1.0
    assert diou_penalty(Box(0, 0, 1e-6, 1e-6), Box(3, 4, 3, 4)) < 1.0


def test_scale_invariance_of_iou_and_penalty():
    rng = np.random.default_rng(2)
    for _ in range(500):
        a = _random_integer_box(rng)
        b = _random_integer_box(rng)
        s = float(rng.uniform(0.1, 10.0))
        assert iou(a.scale(s), b.scale(s)) == pytest.approx(iou(a, b), rel=1e-9, abs=1e-12)
        assert diou_penalty(a.scale(s), b.scale(s)) == pytest.approx(diou_penalty(a, b), rel=1e-9, abs=1e-12)
