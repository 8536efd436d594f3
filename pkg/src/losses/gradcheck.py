"""Randomized agreement check between analytic and central-difference gradients.

Pairs are sampled away from the measure-zero configurations where the losses
have kinks: every pair of corner coordinates that could coincide (shared
intersection edges, shared enclosing edges, edges where the overlap appears)
is kept at least ``margin`` pixels apart, so a perturbation of ``eps`` never
crosses a kink when ``eps < margin``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

import numpy as np

from src.losses.box_losses import LossKind, finite_diff_gradient, loss_gradient
from src.models.boxes import CenterBox
from src.utils.reproducibility import make_numpy_generator

logger = logging.getLogger(__name__)

COMPONENTS = ("d_cx", "d_cy", "d_w", "d_h")


@dataclass
class GradCheckConfig:
    samples: int = 1000
    eps: float = 1e-6
    seed: int = 7
    canvas: float = 10.0
    min_size: float = 0.5
    margin: float = 1e-3
    rtol: float = 1e-5
    atol: float = 1e-8
    small: float = 1e-3


@dataclass
class GradCheckResult:
    samples: int
    max_rel_error: float = 0.0
    max_abs_error_small: float = 0.0
    failures: List[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def corner_gap(pred: CenterBox, gt: CenterBox) -> float:
    """Smallest distance between corner coordinates that could tie."""
    p = pred.to_box()
    g = gt.to_box()
    gaps = [
        abs(p.x1 - g.x1), abs(p.x2 - g.x2), abs(p.x2 - g.x1), abs(p.x1 - g.x2),
        abs(p.y1 - g.y1), abs(p.y2 - g.y2), abs(p.y2 - g.y1), abs(p.y1 - g.y2),
    ]
    return min(gaps)


def sample_box_pairs(
    rng: np.random.Generator,
    count: int,
    canvas: float = 10.0,
    min_size: float = 0.5,
    margin: float = 1e-3,
) -> Iterator[Tuple[CenterBox, CenterBox]]:
    """Yield ``count`` (pred, gt) pairs with positive area and no near-ties."""
    produced = 0
    while produced < count:
        cx, cy, gx, gy = rng.uniform(0.0, canvas, size=4)
        w, h, gw, gh = rng.uniform(min_size, canvas / 2, size=4)
        pred = CenterBox(float(cx), float(cy), float(w), float(h))
        gt = CenterBox(float(gx), float(gy), float(gw), float(gh))
        if corner_gap(pred, gt) < margin:
            continue
        produced += 1
        yield pred, gt


def compare_gradients(analytic, numeric, config: GradCheckConfig) -> Tuple[float, float, Optional[str]]:
    """Return (relative error, small-component absolute error, failing component)."""
    rel_error = 0.0
    abs_small = 0.0
    failed = None
    for name, a, f in zip(COMPONENTS, analytic.as_tuple(), numeric.as_tuple()):
        magnitude = max(abs(a), abs(f))
        diff = abs(a - f)
        if magnitude < config.small:
            abs_small = max(abs_small, diff)
            if diff > config.atol and failed is None:
                failed = name
        else:
            rel = diff / magnitude
            rel_error = max(rel_error, rel)
            if rel > config.rtol and failed is None:
                failed = name
    return rel_error, abs_small, failed


def run_gradcheck(config: Optional[GradCheckConfig] = None) -> GradCheckResult:
    """Compare analytic and numeric gradients for both loss kinds."""
    config = config or GradCheckConfig()
    rng = make_numpy_generator(config.seed)
    result = GradCheckResult(samples=config.samples)

    pairs = sample_box_pairs(rng, config.samples, config.canvas, config.min_size, config.margin)
    for index, (pred, gt) in enumerate(pairs):
        for kind in LossKind:
            analytic = loss_gradient(kind, pred, gt)
            numeric = finite_diff_gradient(kind, pred, gt, config.eps)
            rel, abs_small, failed = compare_gradients(analytic, numeric, config)
            result.max_rel_error = max(result.max_rel_error, rel)
            result.max_abs_error_small = max(result.max_abs_error_small, abs_small)
            if failed is not None:
                result.failures.append({
                    "sample": index,
                    "kind": kind.value,
                    "component": failed,
                    "pred": pred.as_tuple(),
                    "gt": gt.as_tuple(),
                    "analytic": analytic.as_tuple(),
                    "numeric": numeric.as_tuple(),
                })

    if result.failures:
        logger.warning("Gradient check: %d mismatches over %d samples", len(result.failures), config.samples)
    return result
