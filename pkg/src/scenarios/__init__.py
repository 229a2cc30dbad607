"""
Scenario files - DSL loader and the bundled scenario fixtures
"""

from pathlib import Path
from typing import Dict

from .loader import Equation, Request, Scenario, ScenarioLoader

BUNDLED_DIR = Path(__file__).parent / 'bundled'


def bundled_scenarios() -> Dict[str, Path]:
    """Bundled fixture name -> path, sorted by name"""
    return {p.stem: p for p in sorted(BUNDLED_DIR.glob('*.sym'))}


__all__ = ['Equation', 'Request', 'Scenario', 'ScenarioLoader', 'BUNDLED_DIR', 'bundled_scenarios']
