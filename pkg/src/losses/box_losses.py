"""IoU and DIoU box-regression losses with analytic gradients.

Losses are functions of a predicted and a ground-truth :class:`CenterBox`:

- ``IOU``:  L = 1 - IoU(pred, gt)
- ``DIOU``: L = 1 - IoU(pred, gt) + ρ²(b, b_gt) / c²

where ρ is the distance between box centers and c the diagonal of the
smallest enclosing rectangle. Gradients are taken with respect to the
predicted box's ``(cx, cy, w, h)``.

At configurations where an intersection or enclosing edge is shared by both
boxes the loss is not differentiable; there the predicted box's edge is
treated as the binding one (one-sided derivative).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

from src.geometry.box_ops import diou_penalty, iou
from src.models.boxes import CenterBox


class LossKind(str, Enum):
    IOU = "iou"
    DIOU = "diou"

    @classmethod
    def parse(cls, token: str) -> "LossKind":
        try:
            return cls(str(token).strip().lower())
        except ValueError:
            raise ValueError(f"Unknown loss kind: {token!r} (expected 'iou' or 'diou')") from None

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class BoxGradient:
    """Partials of a loss with respect to the predicted (cx, cy, w, h)."""

    d_cx: float
    d_cy: float
    d_w: float
    d_h: float

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.d_cx, self.d_cy, self.d_w, self.d_h)


def _require_positive_area(box: CenterBox, role: str) -> None:
    if box.w <= 0 or box.h <= 0:
        raise ValueError(f"{role} box must have strictly positive width and height, got {box}")


def loss(kind: LossKind, pred: CenterBox, gt: CenterBox) -> float:
    """Loss value; IOU in [0, 1], DIOU in [0, 2)."""
    kind = LossKind(kind)
    _require_positive_area(gt, "Ground-truth")
    pred_box = pred.to_box()
    gt_box = gt.to_box()
    value = 1.0 - iou(pred_box, gt_box)
    if kind is LossKind.DIOU:
        value += diou_penalty(pred_box, gt_box)
    return value


def _axis_terms(p1: float, p2: float, g1: float, g2: float):
    """Overlap and enclosing extents along one axis plus their partials.

    Returns ``(overlap, d_overlap_dc, d_overlap_ds, extent, d_extent_dc,
    d_extent_ds)`` where c is the predicted center and s the predicted size
    along the axis. The overlap is clamped at zero and its partials vanish
    there.
    """
    overlap = min(p2, g2) - max(p1, g1)
    if overlap > 0:
        hi = 1.0 if p2 <= g2 else 0.0
        lo = 1.0 if p1 >= g1 else 0.0
        d_overlap_dc = hi - lo
        d_overlap_ds = 0.5 * (hi + lo)
    else:
        overlap = 0.0
        d_overlap_dc = d_overlap_ds = 0.0

    extent = max(p2, g2) - min(p1, g1)
    hi = 1.0 if p2 >= g2 else 0.0
    lo = 1.0 if p1 <= g1 else 0.0
    return overlap, d_overlap_dc, d_overlap_ds, extent, hi - lo, 0.5 * (hi + lo)


def loss_gradient(kind: LossKind, pred: CenterBox, gt: CenterBox) -> BoxGradient:
    """Analytic gradient of :func:`loss` at ``pred``."""
    kind = LossKind(kind)
    _require_positive_area(gt, "Ground-truth")
    _require_positive_area(pred, "Predicted")

    pred_box = pred.to_box()
    gt_box = gt.to_box()

    iw, diw_dcx, diw_dw, cw, dcw_dcx, dcw_dw = _axis_terms(
        pred_box.x1, pred_box.x2, gt_box.x1, gt_box.x2
    )
    ih, dih_dcy, dih_dh, ch, dch_dcy, dch_dh = _axis_terms(
        pred_box.y1, pred_box.y2, gt_box.y1, gt_box.y2
    )

    if iw > 0 and ih > 0:
        inter = iw * ih
        d_inter = (diw_dcx * ih, dih_dcy * iw, diw_dw * ih, dih_dh * iw)
    else:
        inter = 0.0
        d_inter = (0.0, 0.0, 0.0, 0.0)

    union = pred_box.area + gt_box.area - inter
    # d(union) = d(pred area) - d(inter), with d(pred area) = (0, 0, h, w)
    d_area = (0.0, 0.0, pred_box.height, pred_box.width)
    u2 = union * union
    grad = [-(di * (union + inter) - inter * da) / u2 for di, da in zip(d_inter, d_area)]

    if kind is LossKind.DIOU:
        c2 = cw * cw + ch * ch
        if c2 > 0:
            dx = pred.cx - gt.cx
            dy = pred.cy - gt.cy
            rho2 = dx * dx + dy * dy
            d_rho2 = (2 * dx, 2 * dy, 0.0, 0.0)
            d_c2 = (2 * cw * dcw_dcx, 2 * ch * dch_dcy, 2 * cw * dcw_dw, 2 * ch * dch_dh)
            c4 = c2 * c2
            for k in range(4):
                grad[k] += (d_rho2[k] * c2 - rho2 * d_c2[k]) / c4

    return BoxGradient(*grad)


def _perturbed(box: CenterBox, index: int, delta: float) -> CenterBox:
    params = list(box.as_tuple())
    params[index] += delta
    return CenterBox(*params)


def finite_diff_gradient(kind: LossKind, pred: CenterBox, gt: CenterBox, eps: float = 1e-6) -> BoxGradient:
    """Central-difference approximation of :func:`loss_gradient`."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    kind = LossKind(kind)
    _require_positive_area(gt, "Ground-truth")
    partials = []
    for index in range(4):
        upper = loss(kind, _perturbed(pred, index, eps), gt)
        lower = loss(kind, _perturbed(pred, index, -eps), gt)
        partials.append((upper - lower) / (2 * eps))
    return BoxGradient(*partials)
