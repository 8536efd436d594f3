"""
Synthetic box-regression benchmark: IoU loss vs DIoU loss under gradient descent.

A predicted box is moved toward a fixed target by fixed-step, momentum-free
gradient descent on either loss. Each case is run for both losses from the
same initial box, and the benchmark reports how often and how fast each one
reaches ``stop_iou``.

Two step rules are available:

- ``normalized`` (default): each axis moves ``learning_rate × extent`` along
  the normalized gradient of its own parameters ``(cx, w)`` or ``(cy, h)``,
  where extent is the width or height of the box enclosing prediction and
  target. The rule is scale-equivariant.
- ``plain``: ``pred ← pred − learning_rate × gradient`` in pixel units.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.geometry.box_ops import enclosing_box, iou
from src.losses.box_losses import LossKind, loss, loss_gradient
from src.metrics.statistical_tests import StatisticalAnalyzer
from src.models.boxes import CenterBox
from src.utils.config import load_config
from src.utils.reproducibility import make_numpy_generator

logger = logging.getLogger(__name__)

STEP_RULES = ("normalized", "plain")
START_MODES = ("any", "overlapping", "disjoint")
MAX_SAMPLING_ATTEMPTS = 100_000


@dataclass
class SimConfig:
    case_count: int = 1000
    seed: int = 42
    learning_rate: float = 0.05
    max_steps: int = 10_000
    stop_iou: float = 0.9
    canvas: float = 100.0
    min_size: float = 1.0
    start: str = "any"
    step_rule: str = "normalized"

    def __post_init__(self):
        if self.case_count < 0:
            raise ValueError(f"case_count must be non-negative, got {self.case_count}")
        if self.max_steps < 0:
            raise ValueError(f"max_steps must be non-negative, got {self.max_steps}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 < self.stop_iou <= 1.0:
            raise ValueError(f"stop_iou must lie in (0, 1], got {self.stop_iou}")
        if not self.min_size > 0:
            raise ValueError(f"min_size must be positive, got {self.min_size}")
        if not self.canvas / 2 > self.min_size:
            raise ValueError(f"canvas {self.canvas} too small for min_size {self.min_size}")
        if self.start not in START_MODES:
            raise ValueError(f"start must be one of {START_MODES}, got {self.start!r}")
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"step_rule must be one of {STEP_RULES}, got {self.step_rule!r}")

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "SimConfig":
        data = payload.get("simulation", payload)
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"Unknown simulation settings: {unknown}")
        return cls(**data)

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "SimConfig":
        return cls.from_dict(load_config(str(path)))

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class Trajectory:
    kind: LossKind
    losses: List[float] = field(default_factory=list)
    boxes: List[CenterBox] = field(default_factory=list)
    ious: List[float] = field(default_factory=list)
    steps_to_success: Optional[int] = None
    stalled: bool = False

    @property
    def converged(self) -> bool:
        return self.steps_to_success is not None

    @property
    def final_iou(self) -> float:
        return self.ious[-1] if self.ious else 0.0

    @property
    def final_loss(self) -> float:
        return self.losses[-1] if self.losses else float("nan")

    @property
    def steps_taken(self) -> int:
        return max(len(self.losses) - 1, 0)


def descent_step(pred: CenterBox, target: CenterBox, kind: LossKind, config: SimConfig) -> CenterBox:
    """One gradient step with the configured rule; sizes floor at ``min_size``."""
    grad = loss_gradient(kind, pred, target)
    if config.step_rule == "plain":
        step_x = step_y = config.learning_rate
    else:
        extent = enclosing_box(pred.to_box(), target.to_box())
        norm_x = math.sqrt(grad.d_cx * grad.d_cx + grad.d_w * grad.d_w)
        norm_y = math.sqrt(grad.d_cy * grad.d_cy + grad.d_h * grad.d_h)
        step_x = config.learning_rate * extent.width / norm_x if norm_x > 0 else 0.0
        step_y = config.learning_rate * extent.height / norm_y if norm_y > 0 else 0.0
    return CenterBox(
        cx=pred.cx - step_x * grad.d_cx,
        cy=pred.cy - step_y * grad.d_cy,
        w=max(config.min_size, pred.w - step_x * grad.d_w),
        h=max(config.min_size, pred.h - step_y * grad.d_h),
    )


def run_case(init: CenterBox, target: CenterBox, kind: LossKind, config: SimConfig) -> Trajectory:
    """Descend from ``init`` until IoU reaches ``stop_iou`` or ``max_steps`` run out.

    An update that leaves the box unchanged marks the trajectory as stalled
    and ends it.
    """
    kind = LossKind(kind)
    if target.w <= 0 or target.h <= 0:
        raise ValueError(f"Target must have positive area, got {target}")
    if init.w < config.min_size or init.h < config.min_size:
        raise ValueError(f"Initial box {init} is smaller than min_size {config.min_size}")

    trajectory = Trajectory(kind=kind)
    target_box = target.to_box()
    pred = init
    for step in range(config.max_steps + 1):
        overlap = iou(pred.to_box(), target_box)
        trajectory.losses.append(loss(kind, pred, target))
        trajectory.ious.append(overlap)
        trajectory.boxes.append(pred)
        if overlap >= config.stop_iou:
            trajectory.steps_to_success = step
            break
        if step == config.max_steps:
            break
        updated = descent_step(pred, target, kind, config)
        if updated == pred:
            trajectory.stalled = True
            break
        pred = updated
    return trajectory


def _random_box(rng: np.random.Generator, config: SimConfig) -> CenterBox:
    cx, cy = rng.uniform(0.0, config.canvas, size=2)
    w, h = rng.uniform(config.min_size, config.canvas / 2, size=2)
    return CenterBox(float(cx), float(cy), float(w), float(h))


def start_partition(init: CenterBox, target: CenterBox) -> str:
    return "overlapping" if iou(init.to_box(), target.to_box()) > 0 else "disjoint"


def sample_case(rng: np.random.Generator, config: SimConfig) -> Tuple[CenterBox, CenterBox]:
    """Draw an (init, target) pair, rejecting pairs outside ``config.start``."""
    for _ in range(MAX_SAMPLING_ATTEMPTS):
        init = _random_box(rng, config)
        target = _random_box(rng, config)
        if config.start == "any" or start_partition(init, target) == config.start:
            return init, target
    raise ValueError(f"Could not sample a {config.start!r} pair on a {config.canvas}px canvas")


def _kind_summary(frame: pd.DataFrame, kind: LossKind) -> Dict[str, Any]:
    n = len(frame)
    prefix = kind.value
    if n == 0:
        return {'cases': 0, 'success_rate': None, 'median_steps': None,
                'mean_steps': None, 'steps_ci95': None, 'mean_final_loss': None}
    converged = frame[f'converged_{prefix}']
    steps = frame.loc[converged, f'steps_{prefix}'].astype(float)
    return {
        'cases': n,
        'success_rate': float(converged.mean()),
        'median_steps': float(steps.median()) if len(steps) else None,
        'mean_steps': float(steps.mean()) if len(steps) else None,
        'steps_ci95': StatisticalAnalyzer.confidence_interval(steps.to_numpy()),
        'mean_final_loss': float(frame[f'final_loss_{prefix}'].mean()),
    }


def summarize(cases: pd.DataFrame) -> Dict[str, Any]:
    """Per-kind and per-start-partition statistics plus a paired step comparison."""
    cases = cases.sort_values('case').reset_index(drop=True)
    summary: Dict[str, Any] = {
        'cases': int(len(cases)),
        'kinds': {kind.value: _kind_summary(cases, kind) for kind in LossKind},
        'partitions': {},
    }
    for partition in ('overlapping', 'disjoint'):
        subset = cases[cases['partition'] == partition] if len(cases) else cases
        summary['partitions'][partition] = {
            kind.value: _kind_summary(subset, kind) for kind in LossKind
        }

    both = cases[cases['converged_iou'] & cases['converged_diou']] if len(cases) else cases
    summary['paired_steps'] = StatisticalAnalyzer.paired_comparison(
        both['steps_iou'].astype(float).to_numpy() if len(both) else [],
        both['steps_diou'].astype(float).to_numpy() if len(both) else [],
    )
    return summary


@dataclass
class BenchmarkResult:
    config: SimConfig
    cases: pd.DataFrame
    summary: Dict[str, Any]
    trajectories: List[Tuple[Trajectory, Trajectory]] = field(default_factory=list)


CASE_COLUMNS = [
    'case', 'partition',
    'init_cx', 'init_cy', 'init_w', 'init_h',
    'target_cx', 'target_cy', 'target_w', 'target_h',
    'initial_loss_iou', 'initial_loss_diou',
    'steps_iou', 'converged_iou', 'stalled_iou', 'final_iou_iou', 'final_loss_iou',
    'steps_diou', 'converged_diou', 'stalled_diou', 'final_iou_diou', 'final_loss_diou',
]


def _case_row(index: int, init: CenterBox, target: CenterBox, pair: Sequence[Trajectory]) -> Dict[str, Any]:
    row: Dict[str, Any] = {
        'case': index,
        'partition': start_partition(init, target),
        'init_cx': init.cx, 'init_cy': init.cy, 'init_w': init.w, 'init_h': init.h,
        'target_cx': target.cx, 'target_cy': target.cy, 'target_w': target.w, 'target_h': target.h,
    }
    for trajectory in pair:
        prefix = trajectory.kind.value
        row[f'initial_loss_{prefix}'] = trajectory.losses[0]
        row[f'steps_{prefix}'] = trajectory.steps_to_success
        row[f'converged_{prefix}'] = trajectory.converged
        row[f'stalled_{prefix}'] = trajectory.stalled
        row[f'final_iou_{prefix}'] = trajectory.final_iou
        row[f'final_loss_{prefix}'] = trajectory.final_loss
    return row


def run_benchmark(
    config: SimConfig,
    keep_trajectories: int = 1,
    progress: bool = False,
    experiment_logger=None,
) -> BenchmarkResult:
    """Run every case under both losses from identical initial boxes.

    The first ``keep_trajectories`` (IoU, DIoU) trajectory pairs are kept for
    curve export. When an ``ExperimentLogger`` is given, each case row is
    appended to its JSONL log.
    """
    rng = make_numpy_generator(config.seed)
    rows: List[Dict[str, Any]] = []
    kept: List[Tuple[Trajectory, Trajectory]] = []
    for index in tqdm(range(config.case_count), desc="cases", disable=None if progress else True):
        init, target = sample_case(rng, config)
        pair = (
            run_case(init, target, LossKind.IOU, config),
            run_case(init, target, LossKind.DIOU, config),
        )
        row = _case_row(index, init, target, pair)
        rows.append(row)
        if index < keep_trajectories:
            kept.append(pair)
        if experiment_logger is not None:
            experiment_logger.log_episode(row)

    cases = pd.DataFrame(rows, columns=CASE_COLUMNS)
    cases['steps_iou'] = cases['steps_iou'].astype('Int64')
    cases['steps_diou'] = cases['steps_diou'].astype('Int64')
    for column in ('converged_iou', 'converged_diou', 'stalled_iou', 'stalled_diou'):
        cases[column] = cases[column].astype(bool)
    summary = summarize(cases)
    logger.info(
        "Benchmark of %d cases: IoU success %s, DIoU success %s",
        summary['cases'], summary['kinds']['iou']['success_rate'], summary['kinds']['diou']['success_rate'],
    )
    return BenchmarkResult(config=config, cases=cases, summary=summary, trajectories=kept)


def export_curves(trajectories: Tuple[Trajectory, Trajectory]) -> str:
    """Paired loss curves as ``step,loss_iou,loss_diou`` rows with six decimals.

    The shorter trace is padded with its final value.
    """
    by_kind = {t.kind: t for t in trajectories}
    if set(by_kind) != {LossKind.IOU, LossKind.DIOU}:
        raise ValueError("export_curves needs one IoU and one DIoU trajectory from the same case")
    iou_losses = by_kind[LossKind.IOU].losses
    diou_losses = by_kind[LossKind.DIOU].losses
    if by_kind[LossKind.IOU].boxes[:1] != by_kind[LossKind.DIOU].boxes[:1]:
        raise ValueError("Trajectories start from different boxes")
    length = max(len(iou_losses), len(diou_losses))

    def padded(values: List[float]) -> List[float]:
        return values + [values[-1]] * (length - len(values))

    frame = pd.DataFrame({
        'step': np.arange(length, dtype=int),
        'loss_iou': padded(iou_losses),
        'loss_diou': padded(diou_losses),
    })
    return frame.to_csv(index=False, float_format="%.6f", lineterminator="\n")


def export_cases(cases: pd.DataFrame) -> str:
    return cases.to_csv(index=False, float_format="%.6f", lineterminator="\n")


def format_summary(summary: Dict[str, Any]) -> str:
    """Plain-text summary lines for the command line."""

    def fmt(value: Optional[float], pattern: str) -> str:
        return "n/a" if value is None else pattern.format(value)

    lines = [f"cases: {summary['cases']}"]
    for kind, stats in summary['kinds'].items():
        lines.append(
            f"{kind}: success_rate={fmt(stats['success_rate'], '{:.4f}')} "
            f"median_steps={fmt(stats['median_steps'], '{:.1f}')} "
            f"mean_steps={fmt(stats['mean_steps'], '{:.2f}')} "
            f"mean_final_loss={fmt(stats['mean_final_loss'], '{:.6f}')}"
        )
    for partition, per_kind in summary['partitions'].items():
        for kind, stats in per_kind.items():
            lines.append(
                f"{partition}/{kind}: cases={stats['cases']} "
                f"success_rate={fmt(stats['success_rate'], '{:.4f}')} "
                f"median_steps={fmt(stats['median_steps'], '{:.1f}')}"
            )
    paired = summary['paired_steps']
    lines.append(
        f"paired steps (iou - diou): n={paired['n']} "
        f"mean_difference={fmt(paired['mean_difference'], '{:.3f}')} "
        f"cohens_d={fmt(paired['cohens_d'], '{:.3f}')} "
        f"p_value={fmt(paired['p_value'], '{:.3g}')}"
    )
    return "\n".join(lines) + "\n"
