"""Core module for the spreading simulator: configuration, presets and errors."""

from .config import SystemConfig, get_default_config_path
from .exceptions import (
    ConfigurationError,
    ContractViolation,
    DomainError,
    OutputError,
    SimulationError,
)

__all__ = [
    "SystemConfig",
    "get_default_config_path",
    "SimulationError",
    "ConfigurationError",
    "ContractViolation",
    "DomainError",
    "OutputError",
]
