"""Utility package exports."""

from .config import load_config, save_config
from .logging import ExperimentLogger, configure_logging
from .reproducibility import make_numpy_generator, set_global_seeds
from .trace_logger import TraceLogger

__all__ = [
    "ExperimentLogger",
    "TraceLogger",
    "configure_logging",
    "load_config",
    "make_numpy_generator",
    "save_config",
    "set_global_seeds",
]
