"""Axis-aligned box types in continuous pixel coordinates.

Two equivalent parameterizations are used throughout the toolkit:

- :class:`Box`: corner form ``(x1, y1, x2, y2)``, x rightward, y downward.
- :class:`CenterBox`: center form ``(cx, cy, w, h)``, the parameterization
  the losses are differentiated in.

Both are frozen dataclasses so they can be shared freely between workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple


def _check_finite(**coords: float) -> None:
    for name, value in coords.items():
        if not math.isfinite(value):
            raise ValueError(f"Box coordinate {name}={value!r} is not finite")


@dataclass(frozen=True)
class Box:
    """Corner-form rectangle. Zero-area boxes are allowed, inverted ones are not."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        _check_finite(x1=self.x1, y1=self.y1, x2=self.x2, y2=self.y2)
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValueError(
                f"Inverted box corners: ({self.x1}, {self.y1}, {self.x2}, {self.y2})"
            )

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def center(self) -> Tuple[float, float]:
        return ((self.x1 + self.x2) / 2, (self.y1 + self.y2) / 2)

    def to_center(self) -> "CenterBox":
        return CenterBox.from_box(self)

    def as_list(self) -> list:
        return [self.x1, self.y1, self.x2, self.y2]

    def translate(self, dx: float, dy: float) -> "Box":
        return Box(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)

    def scale(self, s: float) -> "Box":
        if s <= 0:
            raise ValueError(f"Scale factor must be positive, got {s}")
        return Box(self.x1 * s, self.y1 * s, self.x2 * s, self.y2 * s)

    def __str__(self):
        return f"Box({self.x1:.2f}, {self.y1:.2f}, {self.x2:.2f}, {self.y2:.2f})"


@dataclass(frozen=True)
class CenterBox:
    """Center-form rectangle ``(cx, cy, w, h)`` with non-negative size."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        _check_finite(cx=self.cx, cy=self.cy, w=self.w, h=self.h)
        if self.w < 0 or self.h < 0:
            raise ValueError(f"Negative box size: w={self.w}, h={self.h}")

    @classmethod
    def from_box(cls, box: Box) -> "CenterBox":
        cx, cy = box.center()
        return cls(cx=cx, cy=cy, w=box.x2 - box.x1, h=box.y2 - box.y1)

    def to_box(self) -> Box:
        half_w = self.w / 2
        half_h = self.h / 2
        return Box(self.cx - half_w, self.cy - half_h, self.cx + half_w, self.cy + half_h)

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.cx, self.cy, self.w, self.h)

    def __str__(self):
        return f"CenterBox(cx={self.cx:.3f}, cy={self.cy:.3f}, w={self.w:.3f}, h={self.h:.3f})"
