"""Line-delimited JSON detection records.

One object per line::

    {"image_id": "a", "score": 0.9, "class": "Person", "box": [x1, y1, x2, y2]}

``class`` is optional and defaults to ``"Person"``. Blank lines are ignored.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable, List, Union

from src.models.boxes import Box
from src.models.detections import DEFAULT_CLASS, Detection


class DetectionRecordError(ValueError):
    """Raised for a detection record line that cannot be parsed."""

    def __init__(self, line_number: int, message: str, source: str = ""):
        self.line_number = line_number
        self.source = source
        prefix = f"{source}:" if source else "line "
        super().__init__(f"{prefix}{line_number}: {message}")


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _as_float(value: Any) -> float:
    try:
        return float(value)
    except OverflowError:
        raise ValueError(f"number too large for a float: {str(value)[:20]}...") from None


def _record_to_detection(record: Any) -> Detection:
    if not isinstance(record, dict):
        raise ValueError(f"expected a JSON object, got {type(record).__name__}")
    for key in ("image_id", "score", "box"):
        if key not in record:
            raise ValueError(f"missing required field {key!r}")

    image_id = record["image_id"]
    if not isinstance(image_id, str):
        raise ValueError(f"image_id must be a string, got {image_id!r}")
    score = record["score"]
    if not _is_number(score) or not math.isfinite(_as_float(score)):
        raise ValueError(f"score must be a finite number, got {score!r}")
    if not 0.0 <= score <= 1.0:
        raise ValueError(f"score {score!r} outside [0, 1]")
    class_name = record.get("class", DEFAULT_CLASS)
    if not isinstance(class_name, str) or not class_name:
        raise ValueError(f"class must be a non-empty string, got {class_name!r}")
    coords = record["box"]
    if not isinstance(coords, list) or len(coords) != 4 or not all(_is_number(c) for c in coords):
        raise ValueError(f"box must be an array of 4 numbers, got {coords!r}")

    box = Box(*(_as_float(c) for c in coords))
    return Detection(image_id=image_id, box=box, score=float(score), class_name=class_name)


def parse_detections(lines_text: str, source: str = "") -> List[Detection]:
    """Parse a JSONL document into detections, in file order."""
    detections: List[Detection] = []
    # records end at "\n" only; U+2028 and friends may appear inside ids
    for line_number, line in enumerate(lines_text.split("\n"), start=1):
        if line.endswith("\r"):
            line = line[:-1]
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except ValueError as exc:
            # JSONDecodeError, or an integer literal past the digit limit
            reason = exc.msg if isinstance(exc, json.JSONDecodeError) else str(exc)
            raise DetectionRecordError(line_number, f"malformed record ({reason})", source) from None
        try:
            detections.append(_record_to_detection(record))
        except ValueError as exc:
            raise DetectionRecordError(line_number, str(exc), source) from None
    return detections


def detection_to_record(det: Detection) -> dict:
    return {
        "image_id": det.image_id,
        "score": det.score,
        "class": det.class_name,
        "box": det.box.as_list(),
    }


def serialize_detections(dets: Iterable[Detection]) -> str:
    return "".join(json.dumps(detection_to_record(det)) + "\n" for det in dets)


def load_detections(path: Union[str, Path]) -> List[Detection]:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return parse_detections(text, source=str(path))

