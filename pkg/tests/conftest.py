"""Common pytest fixtures for sinai-spectra tests

This module provides shared fixtures used across the test suite.
Fixtures are organized by category: paths, environments and configuration.
"""

import pytest

from sinaispectra.domain.environment import DisorderLaw
from tests.builders import ConfigBuilder, EnvironmentBuilder, PathBuilder


# ==============================================================================
# Path Fixtures
# ==============================================================================


@pytest.fixture
def z5_path():
    """Fixture providing the five-point double-well path

    Minima at -0.5 (value -2) and 0.5 (value -3), maxima at -1, 0 and 1.
    """
    return PathBuilder().z5().build()


@pytest.fixture
def increasing_path():
    """Fixture providing the straight path from (-1, 0) to (1, 3)"""
    return PathBuilder().through((-1.0, 0.0), (1.0, 3.0)).build()


# ==============================================================================
# Environment Fixtures
# ==============================================================================


@pytest.fixture
def flat_environment():
    """Fixture providing omega = 1/2 on [-10, 10] (V = 0)"""
    return EnvironmentBuilder().build()


@pytest.fixture
def drifting_environment():
    """Fixture providing omega = 0.3 on [0, 3]"""
    return EnvironmentBuilder().on_window(0, 3).with_constant_omega(0.3).build()


@pytest.fixture
def two_point_law():
    """Fixture providing the two-point law with p = 0.3"""
    return DisorderLaw.two_point(0.3)


@pytest.fixture
def seeded_environment():
    """Fixture providing a symmetric_uniform(0.1) environment on [-40, 40], seed 3"""
    return (EnvironmentBuilder()
            .on_window(-40, 40)
            .sampled(DisorderLaw.symmetric_uniform(0.1), seed=3)
            .build())


# ==============================================================================
# Configuration Fixtures
# ==============================================================================


@pytest.fixture
def small_config(tmp_path):
    """Fixture providing a small thm1 configuration writing into tmp_path"""
    return ConfigBuilder().with_output_dir(tmp_path / "out").build()


@pytest.fixture
def z5_environment():
    """Fixture providing an environment whose V_16 is 4 times the double-well path

    Window [-15, 16] with kappa = 0.05; the labeled minima sit at sites 8 and -8.
    """
    increments = [-1.0] * 8 + [1.5] * 8 + [-2.0] * 8 + [2.5] * 8
    return (EnvironmentBuilder()
            .on_window(-15, 16)
            .with_kappa(0.05)
            .with_increments(increments)
            .build())
