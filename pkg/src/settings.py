"""
Configuration loading
Built-in defaults mirror config/config.yaml; a YAML file given explicitly is merged on top
"""

import copy
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

DEFAULT_SETTINGS: Dict[str, Any] = {
    'logging': {
        'level': 'INFO',
        'format': LOG_FORMAT,
    },
    'symbolic': {
        'ln_exp_rule': True,
        'order_cap': 12,
    },
    'numeric': {
        'rk4_step': 1e-3,
        'fd_step': 1e-6,
        'residual_tolerance': 1e-8,
        'closed_form_tolerance': 1e-8,
        'fd_tolerance': 1e-5,
        'fd_spot_checks': 20,
        'random_seed': 20240917,
    },
    'report': {
        'indent': 2,
    },
}


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Merge override into a copy of base, section by section"""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_settings(config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load toolkit settings

    Args:
        config_path: Optional path to a YAML file overriding the defaults

    Returns:
        Settings dictionary
    """
    if config_path is None:
        return copy.deepcopy(DEFAULT_SETTINGS)

    path = Path(config_path)
    with open(path, 'r') as f:
        loaded = yaml.safe_load(f) or {}

    if not isinstance(loaded, dict):
        raise ValueError(f"Config file {path} must contain a mapping at top level")

    logger.debug(f"Loaded settings from {path}")
    return _deep_merge(DEFAULT_SETTINGS, loaded)


def configure_logging(settings: Dict[str, Any], level: Optional[str] = None):
    """
    Configure root logging once for CLI and runner use

    Args:
        settings: Settings dictionary
        level: Optional level name overriding the configured one
    """
    log_cfg = settings.get('logging', {})
    logging.basicConfig(
        level=getattr(logging, (level or log_cfg.get('level', 'INFO')).upper()),
        format=log_cfg.get('format', LOG_FORMAT)
    )
