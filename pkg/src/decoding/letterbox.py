"""Mapping boxes from letterboxed network space back to the original image.

A letterbox resize scales the image by ``scale`` (preserving aspect ratio)
and pads it by ``(pad_x, pad_y)`` to fill the square network input. The
inverse is the affine map ``x_orig = (x - pad_x) / scale``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from src.models.boxes import Box


@dataclass(frozen=True)
class LetterboxTransform:
    scale: float
    pad_x: float = 0.0
    pad_y: float = 0.0
    original_size: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError(f"Letterbox scale must be positive, got {self.scale}")

    @classmethod
    def from_image_size(cls, width: float, height: float, input_size: int = 416) -> "LetterboxTransform":
        if width <= 0 or height <= 0:
            raise ValueError(f"Image size must be positive, got {width}x{height}")
        scale = min(input_size / width, input_size / height)
        pad_x = (input_size - width * scale) / 2
        pad_y = (input_size - height * scale) / 2
        return cls(scale=scale, pad_x=pad_x, pad_y=pad_y, original_size=(float(width), float(height)))

    def to_original(self, box: Box) -> Box:
        x1 = (box.x1 - self.pad_x) / self.scale
        y1 = (box.y1 - self.pad_y) / self.scale
        x2 = (box.x2 - self.pad_x) / self.scale
        y2 = (box.y2 - self.pad_y) / self.scale
        if self.original_size is not None:
            width, height = self.original_size
            x1, x2 = min(max(x1, 0.0), width), min(max(x2, 0.0), width)
            y1, y2 = min(max(y1, 0.0), height), min(max(y2, 0.0), height)
        return Box(x1, y1, x2, y2)

    def to_network(self, box: Box) -> Box:
        return Box(
            box.x1 * self.scale + self.pad_x,
            box.y1 * self.scale + self.pad_y,
            box.x2 * self.scale + self.pad_x,
            box.y2 * self.scale + self.pad_y,
        )
