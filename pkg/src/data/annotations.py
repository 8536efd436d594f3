"""Ground-truth annotation loading.

Accepts VOC-style corner boxes (``xmin/ymin/xmax/ymax``) and CVC-style center
boxes (``xc/yc/w/h``); both may appear in one document. Box tags are looked
up under ``bndbox`` when the object has one, otherwise directly under the
``object`` element.
"""
from __future__ import annotations

import logging
import math
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import List, Optional, Union

from src.models.boxes import Box, CenterBox
from src.models.detections import DatasetIndex, GroundTruth

logger = logging.getLogger(__name__)

CORNER_TAGS = ("xmin", "ymin", "xmax", "ymax")
CENTER_TAGS = ("xc", "yc", "w", "h")


class AnnotationError(ValueError):
    """Raised when an annotation document cannot be turned into ground truth."""


def _read_number(parent: ET.Element, tag: str, where: str) -> float:
    node = parent.find(tag)
    text = (node.text or "").strip() if node is not None else ""
    try:
        value = float(text)
    except ValueError:
        raise AnnotationError(f"{where}: non-numeric <{tag}> value {text!r}") from None
    if not math.isfinite(value):
        raise AnnotationError(f"{where}: non-finite <{tag}> value {text!r}")
    return value


def _has_all(parent: ET.Element, tags) -> bool:
    return all(parent.find(tag) is not None for tag in tags)


def _parse_box(obj: ET.Element, where: str) -> Box:
    holder = obj.find("bndbox")
    if holder is None:
        holder = obj
    if _has_all(holder, CORNER_TAGS):
        x1, y1, x2, y2 = (_read_number(holder, tag, where) for tag in CORNER_TAGS)
        if x1 > x2 or y1 > y2:
            raise AnnotationError(f"{where}: inverted corners ({x1}, {y1}, {x2}, {y2})")
        return Box(x1, y1, x2, y2)
    if _has_all(holder, CENTER_TAGS):
        cx, cy, w, h = (_read_number(holder, tag, where) for tag in CENTER_TAGS)
        if w < 0 or h < 0:
            raise AnnotationError(f"{where}: negative size w={w}, h={h}")
        return CenterBox(cx, cy, w, h).to_box()
    raise AnnotationError(
        f"{where}: box needs either {'/'.join(CORNER_TAGS)} or {'/'.join(CENTER_TAGS)}"
    )


def parse_annotation(xml_text: Union[str, bytes], image_id: str) -> List[GroundTruth]:
    """Parse one annotation document into ground-truth objects in document order."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise AnnotationError(f"malformed XML: {exc}") from None

    gts: List[GroundTruth] = []
    for index, obj in enumerate(root.iter("object")):
        where = f"object {index}"
        name_node = obj.find("name")
        name = (name_node.text or "").strip() if name_node is not None else ""
        if not name:
            raise AnnotationError(f"{where}: missing <name>")
        box = _parse_box(obj, where)
        try:
            gts.append(GroundTruth(image_id=image_id, box=box, class_name=name))
        except ValueError as exc:
            raise AnnotationError(f"{where}: {exc}") from None
    return gts


def load_annotation_file(path: Union[str, Path], image_id: Optional[str] = None) -> List[GroundTruth]:
    path = Path(path)
    try:
        return parse_annotation(path.read_bytes(), image_id or path.stem)
    except AnnotationError as exc:
        raise AnnotationError(f"{path.name}: {exc}") from None


def load_dataset(annotation_directory: Union[str, Path]) -> DatasetIndex:
    """Index every ``<image_id>.xml`` file in a directory.

    Files are visited in sorted name order, so the index does not depend on
    the directory listing order. Images without objects are kept with an
    empty ground-truth list.
    """
    directory = Path(annotation_directory)
    if not directory.exists():
        raise FileNotFoundError(f"Annotation directory not found: {directory}")
    if not directory.is_dir():
        raise NotADirectoryError(f"Not an annotation directory: {directory}")

    index = DatasetIndex()
    for path in sorted(directory.glob("*.xml")):
        index.images[path.stem] = load_annotation_file(path)
    logger.info("Loaded %d annotation files with %d objects from %s", len(index), index.total, directory)
    return index
