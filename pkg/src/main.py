"""Command-line front end: ``python -m src.main <subcommand> ...``

Subcommands: ``eval``, ``nms``, ``decode``, ``gradcheck`` and ``sim``.
Standard output carries data only; diagnostics go to standard error.
Exit codes: 0 success, 1 bad input, 2 internal error.

Run with ``--version`` to print a short commit hash and a configuration
manifest hash useful for reproducibility bookkeeping.
"""
import argparse
import hashlib
import json
import logging
import subprocess
import sys
from pathlib import Path
from typing import List, Optional

from src.data.annotations import load_dataset
from src.data.detection_records import load_detections, serialize_detections
from src.decoding.config import DecoderConfig
from src.decoding.yolo_head import decode_scales, read_raw_head
from src.experiments.convergence_sim import (
    SimConfig,
    export_cases,
    export_curves,
    format_summary,
    run_benchmark,
)
from src.losses.gradcheck import GradCheckConfig, run_gradcheck
from src.metrics.detection_eval import (
    DEFAULT_IOU_THRESHOLD,
    APMethod,
    evaluate,
    export_pr_table,
    format_report,
    report_to_dict,
)
from src.postprocess.nms import DEFAULT_NMS_THRESHOLD, SuppressionMetric, nms_by_image
from src.utils.config import load_config
from src.utils.logging import configure_logging

logger = logging.getLogger(__name__)

PROG = "detgeom"
REPO_ROOT = Path(__file__).resolve().parent.parent
EXIT_OK, EXIT_BAD_INPUT, EXIT_INTERNAL = 0, 1, 2


def _git_commit_hash() -> str:
    try:
        out = subprocess.check_output(
            ["git", "rev-parse", "--short", "HEAD"], cwd=REPO_ROOT, stderr=subprocess.DEVNULL
        )
        return out.decode().strip()
    except Exception:
        return "unknown"


def _config_hash(config_dir: Path = REPO_ROOT / "experiments" / "config") -> str:
    # Hash the concatenation of YAML files in the config directory so we can
    # identify which configuration set produced results.
    h = hashlib.sha1()
    try:
        for path in sorted(config_dir.iterdir()):
            if path.suffix in ('.yml', '.yaml'):
                h.update(path.read_bytes())
        return h.hexdigest()[:8]
    except Exception:
        return "unknown"


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_INPUT, f"{self.prog}: error: {message}\n")


def _write_text(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")


def cmd_eval(args) -> int:
    index = load_dataset(args.gt_dir)
    dets = load_detections(args.det_file)
    report = evaluate(index, dets, args.iou_thresh, APMethod.parse(args.ap_method))
    sys.stdout.write(format_report(report))
    if report.unknown_image_detections:
        logger.warning("%d detections reference images without annotations", report.unknown_image_detections)
    if args.pr_out:
        _write_text(args.pr_out, export_pr_table(report.pr_curve))
    if args.report_out:
        _write_text(args.report_out, json.dumps(report_to_dict(report), indent=2) + "\n")
    if args.plot_out:
        from src.metrics.visualization import ResultVisualizer

        plot_path = Path(args.plot_out)
        ResultVisualizer(plot_path.parent).create_pr_curve_plot(report.pr_curve, report.ap, plot_path.name)
    return EXIT_OK


def cmd_nms(args) -> int:
    dets = load_detections(args.det_file)
    kept = nms_by_image(dets, args.thresh, SuppressionMetric.parse(args.metric))
    logger.info("NMS kept %d of %d detections", len(kept), len(dets))
    sys.stdout.write(serialize_detections(kept))
    return EXIT_OK


def cmd_decode(args) -> int:
    config = DecoderConfig.from_yaml(args.config)
    specs = config.grid_specs(args.conf)
    if len(args.tensor_files) != len(specs):
        raise ValueError(f"Config defines {len(specs)} scales but {len(args.tensor_files)} tensor files were given")
    raws = [read_raw_head(path, spec) for path, spec in zip(args.tensor_files, specs)]
    dets = decode_scales(raws, specs, config.class_names, args.image_id)
    sys.stdout.write(serialize_detections(dets))
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    if args.samples < 0:
        raise ValueError(f"--samples must be non-negative, got {args.samples}")
    if not args.eps > 0:
        raise ValueError(f"--eps must be positive, got {args.eps}")
    result = run_gradcheck(GradCheckConfig(samples=args.samples, eps=args.eps, seed=args.seed))
    sys.stdout.write(
        f"samples: {result.samples}\n"
        f"max_rel_error: {result.max_rel_error:.3e}\n"
        f"max_abs_error_small: {result.max_abs_error_small:.3e}\n"
        f"mismatches: {len(result.failures)}\n"
        f"{'PASS' if result.passed else 'FAIL'}\n"
    )
    return EXIT_OK if result.passed else EXIT_BAD_INPUT


SIM_OVERRIDES = {
    'cases': 'case_count',
    'seed': 'seed',
    'lr': 'learning_rate',
    'max_steps': 'max_steps',
    'stop_iou': 'stop_iou',
    'canvas': 'canvas',
    'min_size': 'min_size',
    'start': 'start',
    'step_rule': 'step_rule',
}


def _sim_config(args) -> SimConfig:
    settings = {}
    if args.config:
        payload = load_config(args.config)
        settings.update(payload.get('simulation', payload))
    for flag, key in SIM_OVERRIDES.items():
        value = getattr(args, flag)
        if value is not None:
            settings[key] = value
    return SimConfig.from_dict(settings)


def cmd_sim(args) -> int:
    config = _sim_config(args)
    result = run_benchmark(config, keep_trajectories=1, progress=args.progress)
    sys.stdout.write(format_summary(result.summary))
    if args.curves_out and result.trajectories:
        _write_text(args.curves_out, export_curves(result.trajectories[0]))
    if args.cases_out:
        _write_text(args.cases_out, export_cases(result.cases))
    if args.plot_out and result.trajectories:
        from src.metrics.visualization import ResultVisualizer

        plot_path = Path(args.plot_out)
        ResultVisualizer(plot_path.parent).create_loss_curve_plot(result.trajectories[0], plot_path.name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog=PROG, description="Detection geometry toolkit: IoU/DIoU losses, NMS, decoding, evaluation.")
    parser.add_argument('--version', action='store_true', help='print commit + config hash and exit')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging on stderr')
    sub = parser.add_subparsers(dest='command', metavar='<command>')

    p = sub.add_parser('eval', help='evaluate detections against annotation XML')
    p.add_argument('gt_dir', help='directory of <image_id>.xml annotations')
    p.add_argument('det_file', help='detection records (JSONL)')
    p.add_argument('--iou-thresh', type=float, default=DEFAULT_IOU_THRESHOLD)
    p.add_argument('--ap-method', choices=[m.value for m in APMethod], default=APMethod.ALL_POINT.value)
    p.add_argument('--pr-out', help='write the PR curve table here')
    p.add_argument('--report-out', help='write the JSON report here')
    p.add_argument('--plot-out', help='write a PR curve PNG here')
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser('nms', help='apply greedy NMS per image')
    p.add_argument('det_file')
    p.add_argument('--thresh', type=float, default=DEFAULT_NMS_THRESHOLD)
    p.add_argument('--metric', choices=[m.value for m in SuppressionMetric], default=SuppressionMetric.IOU.value)
    p.set_defaults(handler=cmd_nms)

    p = sub.add_parser('decode', help='decode raw YOLOv3 head tensors')
    p.add_argument('tensor_files', nargs=3, help='float32 tensors for the 13, 26 and 52 grids')
    p.add_argument('--config', required=True, help='decoder YAML (anchors, class names)')
    p.add_argument('--conf', type=float, default=None, help='confidence threshold (default: from config)')
    p.add_argument('--image-id', default='image')
    p.set_defaults(handler=cmd_decode)

    p = sub.add_parser('gradcheck', help='compare analytic and finite-difference loss gradients')
    p.add_argument('--samples', type=int, default=1000)
    p.add_argument('--eps', type=float, default=1e-6)
    p.add_argument('--seed', type=int, default=7)
    p.set_defaults(handler=cmd_gradcheck)

    p = sub.add_parser('sim', help='IoU vs DIoU convergence benchmark')
    p.add_argument('--config', help='YAML with a simulation section; flags override it')
    p.add_argument('--cases', type=int, default=None)
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('--lr', type=float, default=None)
    p.add_argument('--max-steps', type=int, default=None)
    p.add_argument('--stop-iou', type=float, default=None)
    p.add_argument('--canvas', type=float, default=None)
    p.add_argument('--min-size', type=float, default=None)
    p.add_argument('--start', choices=['any', 'overlapping', 'disjoint'], default=None)
    p.add_argument('--step-rule', choices=['normalized', 'plain'], default=None)
    p.add_argument('--curves-out', help='write the first case loss curves here')
    p.add_argument('--cases-out', help='write the per-case table here')
    p.add_argument('--plot-out', help='write a loss curve PNG for the first case here')
    p.add_argument('--progress', action='store_true', help='show a progress bar on stderr')
    p.set_defaults(handler=cmd_sim)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    if args.version:
        print(f"commit:{_git_commit_hash()} config:{_config_hash()}")
        return EXIT_OK
    if args.command is None:
        parser.error("a subcommand is required")

    try:
        return args.handler(args)
    except (ValueError, OSError) as exc:
        print(f"{PROG} {args.command}: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except Exception as exc:
        logger.debug("Internal error", exc_info=True)
        print(f"{PROG} {args.command}: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
