from .nms import DEFAULT_NMS_THRESHOLD, SuppressionMetric, greedy_nms, nms_by_image

__all__ = ["DEFAULT_NMS_THRESHOLD", "SuppressionMetric", "greedy_nms", "nms_by_image"]
