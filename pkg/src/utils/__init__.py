"""Módulo de utilidades de Config Count."""

from src.utils.errors import (
    CapExceededError,
    ConfigCountError,
    InvalidParameterError,
    NoCopiesError,
    NumericalInvariantError,
    ScenarioError,
)
from src.utils.logging import LoggerMixin, get_logger, setup_logging

__all__ = [
    "get_logger",
    "setup_logging",
    "LoggerMixin",
    "ConfigCountError",
    "InvalidParameterError",
    "CapExceededError",
    "NoCopiesError",
    "NumericalInvariantError",
    "ScenarioError",
]
