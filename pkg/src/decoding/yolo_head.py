"""Decoding of raw YOLOv3 head tensors into detections.

Each of the three heads predicts, for every cell ``(i, j)`` of a square grid
and each of its 3 anchors, a vector ``(tx, ty, tw, th, to, c_1 .. c_K)``.
The standard YOLOv3 transform is applied::

    cx = (σ(tx) + j) · stride        w = anchor_w · exp(tw)
    cy = (σ(ty) + i) · stride        h = anchor_h · exp(th)
    score = σ(to) · max_k σ(c_k)

With K = 80 COCO classes a cell carries 3 × 85 = 255 channels, and the three
grids of a 416 px input (13, 26, 52) give 10647 candidate boxes in total.
Raw tensors are dense float32 arrays laid out row-major as
(row, column, anchor, channel).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit, logit

from src.models.boxes import Box, CenterBox
from src.models.detections import Detection

logger = logging.getLogger(__name__)

ANCHORS_PER_CELL = 3
EXP_CLAMP = 20.0


class HeadShapeError(ValueError):
    """A raw head tensor does not match its grid specification."""


@dataclass(frozen=True)
class GridSpec:
    grid_size: int
    anchors: Tuple[Tuple[float, float], ...]
    input_size: int = 416
    num_classes: int = 80
    conf_threshold: float = 0.25

    def __post_init__(self):
        if self.grid_size <= 0:
            raise ValueError(f"grid_size must be positive, got {self.grid_size}")
        if len(self.anchors) != ANCHORS_PER_CELL:
            raise ValueError(f"Expected {ANCHORS_PER_CELL} anchors per scale, got {len(self.anchors)}")
        if self.num_classes <= 0:
            raise ValueError(f"num_classes must be positive, got {self.num_classes}")
        if not 0.0 <= self.conf_threshold <= 1.0:
            raise ValueError(f"conf_threshold must lie in [0, 1], got {self.conf_threshold}")
        object.__setattr__(self, "anchors", tuple((float(w), float(h)) for w, h in self.anchors))

    @property
    def stride(self) -> float:
        return self.input_size / self.grid_size

    @property
    def channels_per_anchor(self) -> int:
        return 5 + self.num_classes

    @property
    def channels_per_cell(self) -> int:
        return ANCHORS_PER_CELL * self.channels_per_anchor

    @property
    def prediction_count(self) -> int:
        return self.grid_size * self.grid_size * ANCHORS_PER_CELL

    @property
    def expected_length(self) -> int:
        return self.prediction_count * self.channels_per_anchor


@dataclass
class RawHead:
    grid_size: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32).reshape(-1)

    @classmethod
    def zeros(cls, spec: GridSpec) -> "RawHead":
        return cls(spec.grid_size, np.zeros(spec.expected_length, dtype=np.float32))


def read_raw_head(path: Union[str, Path], spec: GridSpec) -> RawHead:
    """Read a flat little-endian float32 file for one scale."""
    values = np.fromfile(str(path), dtype="<f4")
    if values.size != spec.expected_length:
        raise HeadShapeError(
            f"{path}: expected {spec.expected_length} float32 values for grid {spec.grid_size} "
            f"({spec.grid_size}x{spec.grid_size}x{ANCHORS_PER_CELL}x{spec.channels_per_anchor}), "
            f"got {values.size}"
        )
    return RawHead(spec.grid_size, values)


def write_raw_head(path: Union[str, Path], raw: RawHead) -> None:
    raw.values.astype("<f4").tofile(str(path))


def total_prediction_count(specs: Sequence[GridSpec]) -> int:
    """Number of candidate boxes over all scales (Σ grid² × 3)."""
    return sum(spec.prediction_count for spec in specs)


def decode_head(
    raw: RawHead,
    spec: GridSpec,
    class_names: Optional[Sequence[str]] = None,
    image_id: str = "image",
) -> List[Detection]:
    """Decode one scale into detections with score >= ``spec.conf_threshold``.

    Boxes are clipped to the ``[0, input_size]²`` canvas. Detections come out
    in (row, column, anchor) order.
    """
    if raw.grid_size != spec.grid_size:
        raise HeadShapeError(f"Raw head grid {raw.grid_size} does not match spec grid {spec.grid_size}")
    if raw.values.size != spec.expected_length:
        raise HeadShapeError(
            f"Raw head for grid {spec.grid_size} has {raw.values.size} values, expected {spec.expected_length}"
        )
    if not np.all(np.isfinite(raw.values)):
        raise HeadShapeError(f"Raw head for grid {spec.grid_size} contains non-finite values")
    if class_names is not None and len(class_names) != spec.num_classes:
        raise ValueError(f"Got {len(class_names)} class names for {spec.num_classes} classes")

    g = spec.grid_size
    head = raw.values.astype(np.float64).reshape(g, g, ANCHORS_PER_CELL, spec.channels_per_anchor)
    anchors = np.asarray(spec.anchors, dtype=np.float64)
    rows = np.arange(g, dtype=np.float64)[:, None, None]
    cols = np.arange(g, dtype=np.float64)[None, :, None]

    cx = (expit(head[..., 0]) + cols) * spec.stride
    cy = (expit(head[..., 1]) + rows) * spec.stride
    w = anchors[:, 0] * np.exp(np.clip(head[..., 2], -EXP_CLAMP, EXP_CLAMP))
    h = anchors[:, 1] * np.exp(np.clip(head[..., 3], -EXP_CLAMP, EXP_CLAMP))
    objectness = expit(head[..., 4])
    class_scores = expit(head[..., 5:])
    best_class = np.argmax(class_scores, axis=-1)
    scores = objectness * np.max(class_scores, axis=-1)

    limit = float(spec.input_size)
    x1 = np.clip(cx - w / 2, 0.0, limit)
    y1 = np.clip(cy - h / 2, 0.0, limit)
    x2 = np.clip(cx + w / 2, 0.0, limit)
    y2 = np.clip(cy + h / 2, 0.0, limit)

    detections: List[Detection] = []
    for i, j, a in zip(*np.nonzero(scores >= spec.conf_threshold)):
        k = int(best_class[i, j, a])
        detections.append(Detection(
            image_id=image_id,
            box=Box(float(x1[i, j, a]), float(y1[i, j, a]), float(x2[i, j, a]), float(y2[i, j, a])),
            score=float(scores[i, j, a]),
            class_name=class_names[k] if class_names is not None else str(k),
        ))
    logger.debug("Decoded grid %d: %d of %d candidates kept", g, len(detections), spec.prediction_count)
    return detections


def decode_scales(
    raws: Sequence[RawHead],
    specs: Sequence[GridSpec],
    class_names: Optional[Sequence[str]] = None,
    image_id: str = "image",
) -> List[Detection]:
    """Decode all scales and concatenate in the order of ``specs``."""
    if len(raws) != len(specs):
        raise ValueError(f"Got {len(raws)} raw heads for {len(specs)} scales")
    detections: List[Detection] = []
    for raw, spec in zip(raws, specs):
        detections.extend(decode_head(raw, spec, class_names, image_id))
    return detections


def encode_target(box: CenterBox, spec: GridSpec, anchor_index: int) -> Tuple[int, int, float, float, float, float]:
    """Inverse of the decode transform: ``(row, col, tx, ty, tw, th)``.

    The box center must lie strictly inside the canvas and off the cell
    borders, where σ⁻¹ is unbounded.
    """
    if box.w <= 0 or box.h <= 0:
        raise ValueError(f"Cannot encode a box with zero size: {box}")
    gx = box.cx / spec.stride
    gy = box.cy / spec.stride
    col = int(math.floor(gx))
    row = int(math.floor(gy))
    if not (0 <= col < spec.grid_size and 0 <= row < spec.grid_size):
        raise ValueError(f"Box center ({box.cx}, {box.cy}) lies outside the {spec.input_size}px canvas")
    offset_x = gx - col
    offset_y = gy - row
    if offset_x <= 0 or offset_y <= 0:
        raise ValueError(f"Box center ({box.cx}, {box.cy}) lies on a cell border")
    anchor_w, anchor_h = spec.anchors[anchor_index]
    return (
        row,
        col,
        float(logit(offset_x)),
        float(logit(offset_y)),
        math.log(box.w / anchor_w),
        math.log(box.h / anchor_h),
    )
