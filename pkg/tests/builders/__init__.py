"""Test data builders for sinai-spectra tests

This module provides builder pattern helpers for creating test data.
Builders simplify test setup and improve readability by providing fluent interfaces
with sensible defaults.

Example usage:
    env = EnvironmentBuilder().on_window(-5, 5).with_constant_omega(0.3).build()
"""

from tests.builders.config_builder import ConfigBuilder
from tests.builders.environment_builder import EnvironmentBuilder
from tests.builders.path_builder import PathBuilder

__all__ = [
    "ConfigBuilder",
    "EnvironmentBuilder",
    "PathBuilder",
]
