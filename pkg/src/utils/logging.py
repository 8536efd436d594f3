"""
Structured logging for reproducible benchmark runs
"""
import json
import hashlib
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Dict, Any, Optional, Union

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(verbose: bool = False) -> None:
    """Send diagnostics to stderr so stdout carries data only"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )


class ExperimentLogger:
    """JSONL logger for structured experiment data"""

    def __init__(self, config: Dict[str, Any], output_dir: Union[str, Path] = "results/convergence",
                 experiment_id: Optional[str] = None):
        self.config = config
        self.output_dir = Path(output_dir)
        self.experiment_id = experiment_id or self._generate_experiment_id()
        self.log_file = self._setup_logging()

    def _generate_experiment_id(self) -> str:
        """Generate unique experiment ID"""
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        config_hash = self.get_config_hash(self.config)
        return f"exp_{timestamp}_{config_hash[:8]}"

    def _setup_logging(self) -> Path:
        """Create the run directory and save the config next to the log"""
        log_dir = self.output_dir / self.experiment_id
        log_dir.mkdir(parents=True, exist_ok=True)

        config_file = log_dir / "experiment_config.json"
        with open(config_file, 'w', encoding='utf-8') as f:
            json.dump(self.config, f, indent=2)

        log_file = log_dir / "results.jsonl"
        log_file.write_text("", encoding='utf-8')
        return log_file

    @property
    def run_dir(self) -> Path:
        return self.log_file.parent

    def log_episode(self, episode_data: Dict[str, Any]):
        """Log one case record in JSONL format"""
        with open(self.log_file, 'a', encoding='utf-8') as f:
            f.write(json.dumps(episode_data, default=_json_default) + '\n')

    @staticmethod
    def get_config_hash(config: Dict[str, Any]) -> str:
        """Generate hash for configuration reproducibility"""
        config_str = json.dumps(config, sort_keys=True)
        return hashlib.md5(config_str.encode()).hexdigest()

    def log_aggregate_metrics(self, aggregate_data: Dict[str, Any]) -> Path:
        """Log aggregated metrics"""
        agg_file = self.run_dir / "aggregate_metrics.json"
        with open(agg_file, 'w', encoding='utf-8') as f:
            json.dump(aggregate_data, f, indent=2, default=_json_default)
        return agg_file


def _json_default(value: Any):
    # numpy / pandas scalars and missing values
    if hasattr(value, "item"):
        return value.item()
    if value is None or str(value) == "<NA>":
        return None
    return str(value)
