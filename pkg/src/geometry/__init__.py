"""Axis-aligned box geometry."""

from .box_ops import (
    center_distance_sq,
    diou_metric,
    diou_penalty,
    enclosing_box,
    enclosing_diagonal_sq,
    intersection_area,
    iou,
    union_area,
)

__all__ = [
    "center_distance_sq",
    "diou_metric",
    "diou_penalty",
    "enclosing_box",
    "enclosing_diagonal_sq",
    "intersection_area",
    "iou",
    "union_area",
]
