from .config import DEFAULT_SCALES, DecoderConfig
from .letterbox import LetterboxTransform
from .yolo_head import (
    ANCHORS_PER_CELL,
    GridSpec,
    HeadShapeError,
    RawHead,
    decode_head,
    decode_scales,
    encode_target,
    read_raw_head,
    total_prediction_count,
    write_raw_head,
)

__all__ = [
    "ANCHORS_PER_CELL",
    "DEFAULT_SCALES",
    "DecoderConfig",
    "GridSpec",
    "HeadShapeError",
    "LetterboxTransform",
    "RawHead",
    "decode_head",
    "decode_scales",
    "encode_target",
    "read_raw_head",
    "total_prediction_count",
    "write_raw_head",
]
