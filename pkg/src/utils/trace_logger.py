"""Per-case trajectory trace logger for the convergence benchmark.

Each trace file holds the metadata of one simulated case and, per loss kind,
the step-by-step loss, IoU and predicted box.
"""
from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

JsonScalar = Union[str, int, float, bool, None]
JsonValue = Union[JsonScalar, List["JsonValue"], Dict[str, "JsonValue"]]


class TraceLogger:
    """Accumulates trajectory steps in memory and writes them as JSON.

    Nothing is written until :meth:`flush` or :meth:`close`, unless
    ``auto_flush`` is set.
    """

    def __init__(
        self,
        case_id: str,
        output_dir: Union[str, Path],
        *,
        metadata: Optional[Dict[str, Any]] = None,
        auto_flush: bool = False,
    ) -> None:
        self.case_id = case_id
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.trace_path = self.output_dir / f"{case_id}.json"
        self.auto_flush = auto_flush

        self._trace: Dict[str, Any] = {
            "case_id": case_id,
            "created_at": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
            "metadata": self._coerce_value(metadata) if metadata else {},
            "trajectories": {},
            "outcome": {},
        }

    def update_metadata(self, extra: Optional[Dict[str, Any]] = None, **kwargs: Any) -> None:
        payload: Dict[str, Any] = dict(extra or {})
        payload.update(kwargs)
        if not payload:
            return
        self._trace["metadata"].update(self._coerce_value(payload))
        self._maybe_flush()

    def log_step(self, kind: str, *, step: int, loss: float, iou: float, box: Any) -> None:
        """Append one descent step for a loss kind."""
        entry = {
            "step": int(step),
            "loss": float(loss),
            "iou": float(iou),
            "box": self._box_values(box),
        }
        self._trace["trajectories"].setdefault(str(kind), []).append(entry)
        self._maybe_flush()

    def log_trajectory(self, trajectory: Any) -> None:
        """Record every step of a convergence trajectory plus its outcome."""
        kind = str(trajectory.kind)
        for step, (value, overlap, box) in enumerate(zip(trajectory.losses, trajectory.ious, trajectory.boxes)):
            self._trace["trajectories"].setdefault(kind, []).append({
                "step": step,
                "loss": float(value),
                "iou": float(overlap),
                "box": self._box_values(box),
            })
        self.set_outcome(kind, {
            "steps_to_success": trajectory.steps_to_success,
            "stalled": trajectory.stalled,
            "final_iou": trajectory.final_iou,
        })

    def set_outcome(self, kind: str, outcome: Dict[str, Any]) -> None:
        self._trace["outcome"][str(kind)] = self._coerce_value(outcome)
        self._maybe_flush()

    def flush(self) -> Path:
        with self.trace_path.open("w", encoding="utf-8") as fh:
            json.dump(self._trace, fh, indent=2)
        return self.trace_path

    def close(self) -> Path:
        return self.flush()

    def _maybe_flush(self) -> None:
        if self.auto_flush:
            self.flush()

    @staticmethod
    def _box_values(box: Any) -> List[float]:
        if hasattr(box, "as_tuple"):
            return [float(v) for v in box.as_tuple()]
        return [float(v) for v in box]

    @classmethod
    def _coerce_value(cls, value: Any) -> JsonValue:
        """Best-effort conversion to JSON-serializable values."""
        if isinstance(value, (str, int, float, bool)) or value is None:
            return value
        if isinstance(value, dict):
            return {str(k): cls._coerce_value(v) for k, v in value.items()}
        if isinstance(value, (list, tuple, set)):
            return [cls._coerce_value(v) for v in value]
        if hasattr(value, "tolist"):
            return cls._coerce_value(value.tolist())
        if hasattr(value, "item"):
            try:
                return cls._coerce_value(value.item())
            except Exception:  # pragma: no cover - fallback only
                pass
        try:
            return float(value)
        except (TypeError, ValueError):
            return str(value)
