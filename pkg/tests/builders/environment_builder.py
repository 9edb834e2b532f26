"""Builder for creating test environments"""

from typing import Optional, Sequence

import numpy as np

from sinaispectra.domain.environment import (
    DisorderLaw,
    Environment,
    Potential,
    environment_of,
    sample_environment,
)


class EnvironmentBuilder:
    """Fluent interface for creating environments

    Defaults to the flat environment omega = 1/2 on [-10, 10] with kappa = 0.1.

    Example:
        env = EnvironmentBuilder()
            .on_window(0, 3)
            .with_constant_omega(0.3)
            .build()
    """

    def __init__(self):
        """Initialize builder with default values"""
        self._x_lo = -10
        self._x_hi = 10
        self._kappa = 0.1
        self._omega: Optional[Sequence[float]] = None
        self._constant = 0.5
        self._increments: Optional[Sequence[float]] = None
        self._law: Optional[DisorderLaw] = None
        self._seed = 0

    def on_window(self, x_lo: int, x_hi: int) -> "EnvironmentBuilder":
        """Set the inclusive site window

        Returns:
            Self for method chaining
        """
        self._x_lo, self._x_hi = x_lo, x_hi
        return self

    def with_kappa(self, kappa: float) -> "EnvironmentBuilder":
        self._kappa = kappa
        return self

    def with_constant_omega(self, omega: float) -> "EnvironmentBuilder":
        self._constant = omega
        return self

    def with_omega(self, omega: Sequence[float]) -> "EnvironmentBuilder":
        """Use explicit jump probabilities, one per site from x_lo

        Returns:
            Self for method chaining
        """
        self._omega = list(omega)
        return self

    def with_increments(self, increments: Sequence[float]) -> "EnvironmentBuilder":
        """Build from potential increments V(x) - V(x - 1), one per site from x_lo

        Returns:
            Self for method chaining
        """
        self._increments = list(increments)
        return self

    def sampled(self, law: DisorderLaw, seed: int = 0) -> "EnvironmentBuilder":
        self._law, self._seed = law, seed
        return self

    def build(self) -> Environment:
        """Build the environment

        Returns:
            Environment on [x_lo, x_hi] (or on the explicit omega/increment length)
        """
        if self._law is not None:
            return sample_environment(self._law, (self._x_lo, self._x_hi), self._seed)
        if self._increments is not None:
            values = np.concatenate(([0.0], np.cumsum(self._increments)))
            return environment_of(Potential(x_lo=self._x_lo - 1, values=values), self._kappa)
        if self._omega is not None:
            return Environment(x_lo=self._x_lo, omega=np.array(self._omega), kappa=self._kappa)
        size = self._x_hi - self._x_lo + 1
        return Environment(
            x_lo=self._x_lo, omega=np.full(size, self._constant), kappa=self._kappa
        )
