"""
This module contains the sbpglue API
"""

from . import sbpglue_types as Types
from .coupled_system import CoupledSystem
from .sbpglue_config import RunConfig, Scenario

__all__ = ["CoupledSystem", "RunConfig", "Scenario", "Types"]
