"""
Configuration utilities for decoder settings and benchmark runs
"""
from pathlib import Path
from typing import Any, Dict, Union

import yaml

PathLike = Union[str, Path]


def load_config(config_path: PathLike) -> Dict[str, Any]:
    """Load a YAML configuration file into a dict"""
    with open(config_path, 'r', encoding='utf-8') as f:
        data = yaml.safe_load(f)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"Config {config_path} must contain a mapping at top level")
    return data


def save_config(config: Dict[str, Any], config_path: PathLike):
    """Save configuration to YAML file"""
    Path(config_path).parent.mkdir(parents=True, exist_ok=True)
    with open(config_path, 'w', encoding='utf-8') as f:
        yaml.dump(config, f, default_flow_style=False, sort_keys=False)
