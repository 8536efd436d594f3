"""Greedy non-maximum suppression with IoU or DIoU as the suppression metric.

A candidate is suppressed when an already kept detection of the same class
scores strictly more than ``threshold`` against it, so pairs exactly at the
threshold survive. With the DIoU metric (IoU minus the center-distance
penalty) overlapping boxes whose centers are far apart, such as adjacent
pedestrians, are both kept.
"""
from __future__ import annotations

import logging
from enum import Enum
from typing import Callable, Dict, List, Sequence

from src.geometry.box_ops import diou_metric, iou
from src.models.boxes import Box
from src.models.detections import Detection

logger = logging.getLogger(__name__)

DEFAULT_NMS_THRESHOLD = 0.45


class SuppressionMetric(str, Enum):
    IOU = "iou"
    DIOU = "diou"

    @classmethod
    def parse(cls, token: str) -> "SuppressionMetric":
        try:
            return cls(str(token).strip().lower())
        except ValueError:
            raise ValueError(f"Unknown suppression metric: {token!r} (expected 'iou' or 'diou')") from None

    @property
    def function(self) -> Callable[[Box, Box], float]:
        return iou if self is SuppressionMetric.IOU else diou_metric


def greedy_nms(
    dets: Sequence[Detection],
    threshold: float = DEFAULT_NMS_THRESHOLD,
    metric: SuppressionMetric = SuppressionMetric.IOU,
) -> List[Detection]:
    """Suppress redundant detections of a single image.

    Candidates are visited by descending score, ties broken by input order.
    The result is in kept order, a subsequence of the score-sorted input.
    """
    if not 0.0 <= threshold < 1.0:
        raise ValueError(f"NMS threshold must lie in [0, 1), got {threshold}")
    metric_fn = SuppressionMetric(metric).function

    if not dets:
        return []
    image_ids = {det.image_id for det in dets}
    if len(image_ids) > 1:
        raise ValueError(f"greedy_nms expects detections of one image, got {sorted(image_ids)}")

    order = sorted(range(len(dets)), key=lambda i: -dets[i].score)
    kept: List[Detection] = []
    for i in order:
        candidate = dets[i]
        suppressed = any(
            other.class_name == candidate.class_name and metric_fn(other.box, candidate.box) > threshold
            for other in kept
        )
        if not suppressed:
            kept.append(candidate)
    return kept


def nms_by_image(
    dets: Sequence[Detection],
    threshold: float = DEFAULT_NMS_THRESHOLD,
    metric: SuppressionMetric = SuppressionMetric.IOU,
) -> List[Detection]:
    """Apply :func:`greedy_nms` per image, images in first-appearance order."""
    groups: Dict[str, List[Detection]] = {}
    for det in dets:
        groups.setdefault(det.image_id, []).append(det)

    output: List[Detection] = []
    for image_id, group in groups.items():
        kept = greedy_nms(group, threshold, metric)
        logger.debug("NMS %s: kept %d of %d", image_id, len(kept), len(group))
        output.extend(kept)
    return output
