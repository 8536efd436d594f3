"""Box algebra: overlap, enclosing rectangle, center distance and the DIoU terms.

All functions are pure and operate on :class:`~src.models.boxes.Box` in
continuous coordinates: boxes touching edge to edge have zero intersection.

``iou`` implements intersection over union. The loss literature sometimes
prints the fraction upside down (union over intersection); the prose meaning,
an "intersection ratio", is what is implemented here.
"""
from __future__ import annotations

from src.models.boxes import Box


def intersection_area(a: Box, b: Box) -> float:
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0 or ih <= 0:
        return 0.0
    return iw * ih


def union_area(a: Box, b: Box) -> float:
    return a.area + b.area - intersection_area(a, b)


def iou(a: Box, b: Box) -> float:
    """Intersection over union in [0, 1]; 0 when the union has zero area."""
    inter = intersection_area(a, b)
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return inter / union


def enclosing_box(a: Box, b: Box) -> Box:
    """Smallest axis-aligned rectangle containing both boxes."""
    return Box(min(a.x1, b.x1), min(a.y1, b.y1), max(a.x2, b.x2), max(a.y2, b.y2))


def enclosing_diagonal_sq(a: Box, b: Box) -> float:
    """Squared diagonal c² of the enclosing rectangle."""
    cw = max(a.x2, b.x2) - min(a.x1, b.x1)
    ch = max(a.y2, b.y2) - min(a.y1, b.y1)
    return cw * cw + ch * ch


def center_distance_sq(a: Box, b: Box) -> float:
    """Squared Euclidean distance ρ² between the two box centers."""
    ax, ay = a.center()
    bx, by = b.center()
    return (ax - bx) ** 2 + (ay - by) ** 2


def diou_penalty(a: Box, b: Box) -> float:
    """Distance penalty ρ²/c², below 1 unless both boxes are distinct points.

    Returns 0 when c² = 0, i.e. both boxes collapse onto the same point.
    """
    c2 = enclosing_diagonal_sq(a, b)
    if c2 <= 0:
        return 0.0
    return center_distance_sq(a, b) / c2


def diou_metric(a: Box, b: Box) -> float:
    """IoU minus the distance penalty; the suppression metric of DIoU-NMS."""
    return iou(a, b) - diou_penalty(a, b)
