"""Unified experiment entrypoint.

Runs the IoU vs DIoU convergence benchmark described by a YAML config, e.g.
``experiments/config/convergence_default.yaml``::

    experiment:
      name: "convergence_default"
    simulation:
      case_count: 1000
      seed: 42
      ...
    output:
      directory: "results/convergence"
      trace_cases: 5
      generate_plots: true

Writes per-case JSONL records, the aggregate summary, the paired loss-curve
table of the first case, per-case traces and optional figures into a run
directory named after the experiment and its config hash.
"""

import argparse
from pathlib import Path
from typing import Any, Dict, Optional

from src.experiments.convergence_sim import (
    SimConfig,
    export_cases,
    export_curves,
    format_summary,
    run_benchmark,
)
from src.utils.config import load_config
from src.utils.logging import ExperimentLogger, configure_logging
from src.utils.reproducibility import set_global_seeds
from src.utils.trace_logger import TraceLogger


class ConvergenceExperimentRunner:
    """Runs one benchmark config and stores its artifacts."""

    def __init__(self, config: Dict[str, Any], output_dir: Optional[Path] = None):
        self.config = config
        self.sim_config = SimConfig.from_dict(config.get("simulation", {}))
        output = config.get("output", {})
        self.output_dir = Path(output_dir or output.get("directory", "results/convergence"))
        self.trace_cases = int(output.get("trace_cases", 0))
        self.generate_plots = bool(output.get("generate_plots", False))
        set_global_seeds(self.sim_config.seed)

    def run(self) -> Dict[str, Any]:
        name = self.config.get("experiment", {}).get("name", "convergence")
        logged_config = {"experiment": self.config.get("experiment", {}), "simulation": self.sim_config.as_dict()}
        experiment_logger = ExperimentLogger(logged_config, output_dir=self.output_dir / name)
        run_dir = experiment_logger.run_dir

        print(f"🚀 Running convergence benchmark: {name}")
        print(f"Cases: {self.sim_config.case_count}, seed: {self.sim_config.seed}, "
              f"step rule: {self.sim_config.step_rule}, lr: {self.sim_config.learning_rate}")
        print("=" * 50)

        result = run_benchmark(
            self.sim_config,
            keep_trajectories=max(self.trace_cases, 1),
            progress=True,
            experiment_logger=experiment_logger,
        )
        experiment_logger.log_aggregate_metrics(result.summary)
        (run_dir / "cases.csv").write_text(export_cases(result.cases), encoding="utf-8")
        if result.trajectories:
            (run_dir / "loss_curves.csv").write_text(export_curves(result.trajectories[0]), encoding="utf-8")

        for index, pair in enumerate(result.trajectories[: self.trace_cases]):
            row = result.cases.iloc[index]
            tracer = TraceLogger(f"case_{index:04d}", run_dir / "traces",
                                 metadata={"partition": row["partition"], "seed": self.sim_config.seed})
            for trajectory in pair:
                tracer.log_trajectory(trajectory)
            tracer.close()

        if self.generate_plots:
            from src.metrics.visualization import ResultVisualizer

            visualizer = ResultVisualizer(run_dir / "figures")
            if result.trajectories:
                visualizer.create_loss_curve_plot(result.trajectories[0])
            visualizer.create_steps_distribution(result.cases)

        print(format_summary(result.summary), end="")
        print(f"✅ Results saved to: {run_dir}")
        return result.summary


def main():
    parser = argparse.ArgumentParser(description='Run the IoU vs DIoU convergence benchmark')
    parser.add_argument('--config', type=str, required=True,
                        help='Path to config YAML file')
    parser.add_argument('--out', type=str, default=None,
                        help='Override the output directory from the config')
    parser.add_argument('-v', '--verbose', action='store_true')

    args = parser.parse_args()
    configure_logging(args.verbose)

    config: Dict[str, Any] = load_config(args.config)
    runner = ConvergenceExperimentRunner(config, Path(args.out) if args.out else None)
    runner.run()


if __name__ == "__main__":
    main()
