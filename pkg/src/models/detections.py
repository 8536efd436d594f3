"""Scored predictions, ground-truth objects and the evaluation index."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List

from src.models.boxes import Box

DEFAULT_CLASS = "Person"


@dataclass(frozen=True)
class Detection:
    """A decoded or file-loaded prediction for one image."""

    image_id: str
    box: Box
    score: float
    class_name: str = DEFAULT_CLASS

    def __post_init__(self):
        if not isinstance(self.box, Box):
            raise ValueError(f"Detection box must be a Box, got {type(self.box).__name__}")
        if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise ValueError(f"Detection score must lie in [0, 1], got {self.score!r}")


@dataclass(frozen=True)
class GroundTruth:
    """An annotated object. Boxes must have positive area."""

    image_id: str
    box: Box
    class_name: str = DEFAULT_CLASS

    def __post_init__(self):
        if not self.class_name:
            raise ValueError("Ground-truth class name must be non-empty")
        if self.box.area <= 0:
            raise ValueError(f"Ground-truth box must have positive area, got {self.box}")


@dataclass
class DatasetIndex:
    """Ground truth keyed by image id."""

    images: Dict[str, List[GroundTruth]] = field(default_factory=dict)

    @classmethod
    def from_ground_truths(cls, gts: Iterable[GroundTruth]) -> "DatasetIndex":
        index = cls()
        for gt in gts:
            index.images.setdefault(gt.image_id, []).append(gt)
        return index

    @property
    def total(self) -> int:
        return sum(len(entries) for entries in self.images.values())

    def image_ids(self) -> List[str]:
        return sorted(self.images)

    def __contains__(self, image_id: str) -> bool:
        return image_id in self.images

    def __len__(self) -> int:
        return len(self.images)
