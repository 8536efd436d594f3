"""Decoder configuration: input size, threshold, per-scale anchors and class names.

Loaded from YAML, e.g. ``experiments/config/yolov3_decoder.yaml``::

    input_size: 416
    conf_threshold: 0.25
    scales:
      - grid_size: 13
        anchors: [[116, 90], [156, 198], [373, 326]]
      ...
    class_names: [person, bicycle, ...]
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from src.decoding.yolo_head import GridSpec
from src.utils.config import load_config

# Canonical YOLOv3 anchors (width, height) in input pixels, coarse grid first.
DEFAULT_SCALES: Tuple[Tuple[int, Tuple[Tuple[float, float], ...]], ...] = (
    (13, ((116, 90), (156, 198), (373, 326))),
    (26, ((30, 61), (62, 45), (59, 119))),
    (52, ((10, 13), (16, 30), (33, 23))),
)


@dataclass
class DecoderConfig:
    input_size: int = 416
    conf_threshold: float = 0.25
    scales: List[Dict[str, Any]] = field(
        default_factory=lambda: [
            {"grid_size": g, "anchors": [list(a) for a in anchors]} for g, anchors in DEFAULT_SCALES
        ]
    )
    class_names: List[str] = field(default_factory=lambda: ["Person"])

    def __post_init__(self):
        if not self.class_names:
            raise ValueError("Decoder config needs at least one class name")
        if not self.scales:
            raise ValueError("Decoder config needs at least one scale")

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def grid_specs(self, conf_threshold: Optional[float] = None) -> List[GridSpec]:
        threshold = self.conf_threshold if conf_threshold is None else conf_threshold
        return [
            GridSpec(
                grid_size=int(scale["grid_size"]),
                anchors=tuple(tuple(a) for a in scale["anchors"]),
                input_size=int(self.input_size),
                num_classes=self.num_classes,
                conf_threshold=float(threshold),
            )
            for scale in self.scales
        ]

    def with_threshold(self, conf_threshold: float) -> "DecoderConfig":
        return replace(self, conf_threshold=conf_threshold)

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "DecoderConfig":
        data = payload.get("decoder", payload)
        missing = [key for key in ("scales", "class_names") if key not in data]
        if missing:
            raise ValueError(f"Decoder config is missing keys: {missing}")
        return cls(
            input_size=int(data.get("input_size", 416)),
            conf_threshold=float(data.get("conf_threshold", 0.25)),
            scales=[dict(scale) for scale in data["scales"]],
            class_names=[str(name) for name in data["class_names"]],
        )

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "DecoderConfig":
        return cls.from_dict(load_config(path))

    def as_dict(self) -> Dict[str, Any]:
        return {
            "input_size": self.input_size,
            "conf_threshold": self.conf_threshold,
            "scales": self.scales,
            "class_names": list(self.class_names),
        }
