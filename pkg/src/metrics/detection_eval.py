"""
Detection evaluation: TP/FP/FN matching, precision-recall curve and AP
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.geometry.box_ops import iou
from src.models.detections import DatasetIndex, Detection, GroundTruth

logger = logging.getLogger(__name__)

DEFAULT_IOU_THRESHOLD = 0.5


class APMethod(str, Enum):
    ALL_POINT = "allpoint"
    ELEVEN_POINT = "11point"

    @classmethod
    def parse(cls, token: "str | APMethod") -> "APMethod":
        if isinstance(token, cls):
            return token
        try:
            return cls(str(token).strip().lower())
        except ValueError:
            raise ValueError(f"Unknown AP method {token!r}; expected one of {[m.value for m in cls]}") from None


@dataclass
class MatchResult:
    """Outcome of matching one image's detections against its ground truth.

    Lists are parallel and in input order; ``positions`` orders tied scores
    when results from several images are pooled.
    """

    image_id: str
    scores: List[float]
    is_tp: List[bool]
    ious: List[Optional[float]]
    num_ground_truth: int
    positions: List[int] = field(default_factory=list)

    @property
    def tp(self) -> int:
        return sum(self.is_tp)

    @property
    def fp(self) -> int:
        return len(self.is_tp) - self.tp

    @property
    def fn(self) -> int:
        return self.num_ground_truth - self.tp


@dataclass(frozen=True)
class PRPoint:
    score_threshold: float
    precision: float
    recall: float


@dataclass
class EvalReport:
    predicted_count: int
    tp: int
    fp: int
    fn: int
    ap: float
    pr_curve: List[PRPoint]
    precision: float
    recall: float
    num_images: int
    num_ground_truth: int
    iou_threshold: float
    method: APMethod
    unknown_image_detections: int = 0


def precision(tp: int, fp: int) -> float:
    """TP / (TP + FP); 1.0 when there are no predictions."""
    total = tp + fp
    return tp / total if total > 0 else 1.0


def recall(tp: int, fn: int) -> float:
    """TP / (TP + FN); 1.0 when there is no ground truth."""
    total = tp + fn
    return tp / total if total > 0 else 1.0


def _check_threshold(iou_threshold: float) -> None:
    if not 0.0 <= iou_threshold <= 1.0:
        raise ValueError(f"IoU threshold must lie in [0, 1], got {iou_threshold}")


def match_image(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruth],
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    positions: Optional[Sequence[int]] = None,
) -> MatchResult:
    """Greedy one-to-one matching in descending score order.

    Each detection takes its best-IoU unmatched ground truth of the same
    class; it is a TP when that IoU reaches ``iou_threshold``. Ties in score
    keep input order, ties in IoU prefer the earlier ground truth.
    """
    _check_threshold(iou_threshold)
    image_ids = {d.image_id for d in dets} | {g.image_id for g in gts}
    if len(image_ids) > 1:
        raise ValueError(f"match_image expects a single image, got ids {sorted(image_ids)}")
    image_id = next(iter(image_ids)) if image_ids else ""
    if positions is None:
        positions = list(range(len(dets)))
    elif len(positions) != len(dets):
        raise ValueError("positions must have one entry per detection")

    is_tp = [False] * len(dets)
    ious: List[Optional[float]] = [None] * len(dets)
    matched = [False] * len(gts)
    order = sorted(range(len(dets)), key=lambda k: -dets[k].score)
    for k in order:
        det = dets[k]
        best_iou, best_gt = -1.0, -1
        for g, gt in enumerate(gts):
            if matched[g] or gt.class_name != det.class_name:
                continue
            overlap = iou(det.box, gt.box)
            if overlap > best_iou:
                best_iou, best_gt = overlap, g
        if best_gt >= 0 and best_iou >= iou_threshold:
            matched[best_gt] = True
            is_tp[k] = True
            ious[k] = best_iou

    return MatchResult(
        image_id=image_id,
        scores=[d.score for d in dets],
        is_tp=is_tp,
        ious=ious,
        num_ground_truth=len(gts),
        positions=list(positions),
    )


def pr_curve(matches: Sequence[MatchResult]) -> List[PRPoint]:
    """One point per prefix of the pooled, score-sorted detections."""
    pooled = [
        (-score, position, flag)
        for m in matches
        for score, position, flag in zip(m.scores, m.positions, m.is_tp)
    ]
    if not pooled:
        return []
    pooled.sort(key=lambda item: (item[0], item[1]))
    total_gt = sum(m.num_ground_truth for m in matches)

    flags = np.array([flag for _, _, flag in pooled], dtype=bool)
    tp = np.cumsum(flags)
    fp = np.cumsum(~flags)
    curve = []
    for (neg_score, _, _), tp_k, fp_k in zip(pooled, tp, fp):
        tp_k, fp_k = int(tp_k), int(fp_k)
        curve.append(PRPoint(
            score_threshold=-neg_score,
            precision=precision(tp_k, fp_k),
            recall=recall(tp_k, total_gt - tp_k),
        ))
    return curve


def average_precision(curve: Sequence[PRPoint], method: APMethod = APMethod.ALL_POINT) -> float:
    if not curve:
        return 0.0
    method = APMethod.parse(method)
    rec = np.array([p.recall for p in curve], dtype=np.float64)
    prec = np.array([p.precision for p in curve], dtype=np.float64)

    if method is APMethod.ELEVEN_POINT:
        ap = 0.0
        for k in range(11):
            mask = rec >= k / 10
            ap += float(np.max(prec[mask])) if mask.any() else 0.0
        return ap / 11.0

    # sentinels, then the precision envelope
    mrec = np.concatenate(([0.0], rec, [1.0]))
    mpre = np.concatenate(([0.0], prec, [0.0]))
    mpre = np.maximum.accumulate(mpre[::-1])[::-1]
    # sum (Δ recall) * envelope where recall changes
    i = np.where(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[i + 1] - mrec[i]) * mpre[i + 1]))


def evaluate(
    index: DatasetIndex,
    dets: Sequence[Detection],
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    method: APMethod = APMethod.ALL_POINT,
) -> EvalReport:
    """Match per image, pool into a PR curve and integrate AP.

    Detections on images missing from ``index`` match nothing and count as FP.
    """
    _check_threshold(iou_threshold)
    method = APMethod.parse(method)

    by_image: Dict[str, List[int]] = {}
    for position, det in enumerate(dets):
        by_image.setdefault(det.image_id, []).append(position)

    matches: List[MatchResult] = []
    for image_id in index.image_ids():
        positions = by_image.get(image_id, [])
        matches.append(match_image(
            [dets[p] for p in positions], index.images[image_id], iou_threshold, positions
        ))

    unknown = [image_id for image_id in by_image if image_id not in index]
    unknown_count = 0
    for image_id in unknown:
        positions = by_image[image_id]
        unknown_count += len(positions)
        matches.append(match_image([dets[p] for p in positions], [], iou_threshold, positions))
    if unknown_count:
        logger.warning(
            "%d detections on %d images absent from the ground truth counted as FP",
            unknown_count, len(unknown),
        )

    tp = sum(m.tp for m in matches)
    fp = sum(m.fp for m in matches)
    fn = sum(m.fn for m in matches)
    curve = pr_curve(matches)
    return EvalReport(
        predicted_count=len(dets),
        tp=tp,
        fp=fp,
        fn=fn,
        ap=average_precision(curve, method),
        pr_curve=curve,
        precision=precision(tp, fp),
        recall=recall(tp, fn),
        num_images=len(index),
        num_ground_truth=index.total,
        iou_threshold=iou_threshold,
        method=method,
        unknown_image_detections=unknown_count,
    )


def export_pr_table(curve: Sequence[PRPoint]) -> str:
    """``score,precision,recall`` text table with six decimals."""
    frame = pd.DataFrame(
        [(p.score_threshold, p.precision, p.recall) for p in curve],
        columns=["score", "precision", "recall"],
        dtype=float,
    )
    return frame.to_csv(index=False, float_format="%.6f", lineterminator="\n")


def report_to_dict(report: EvalReport, include_curve: bool = True) -> Dict[str, Any]:
    payload = asdict(report)
    payload["method"] = report.method.value
    if not include_curve:
        payload.pop("pr_curve")
    return payload


def format_report(report: EvalReport) -> str:
    """Human-readable summary; AP in percent with two decimals."""
    lines = [
        f"Predicted: {report.predicted_count}",
        f"TP: {report.tp}",
        f"FP: {report.fp}",
        f"FN: {report.fn}",
        f"Precision: {report.precision:.4f}",
        f"Recall: {report.recall:.4f}",
        f"AP: {report.ap * 100:.2f}",
    ]
    return "\n".join(lines) + "\n"
