"""Value types for equilibrium potentials, capacities, Green functions and hitting moments.

All site sets are lattice sites of the environment window. On the rescaled
lattice Z/N the same objects are obtained by relabeling k -> k/N, since
sqrt(N) V_N(k/N) = V(k).
"""

from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Optional, Tuple

import numpy as np


def _sites(values) -> FrozenSet[int]:
    return frozenset(int(x) for x in values)


@dataclass(frozen=True, eq=False)
class EquilibriumPotential:
    """h^lambda_{A,B} tabulated on a contiguous range of sites.

    Attributes:
        A: Sites where the potential equals 1
        B: Sites where the potential equals 0
        lam: Spectral parameter (0 for the plain potential)
        sites: Tabulated sites, increasing and contiguous
        values: h(x) for x in `sites`
        within_unit_interval: False when lambda lies above the bottom of the
            spectrum and the solution left [0, 1]
    """

    A: FrozenSet[int]
    B: FrozenSet[int]
    lam: float
    sites: np.ndarray
    values: np.ndarray
    within_unit_interval: bool = True

    def value_at(self, x):
        """h(x); sites outside the table take the value of the nearest tabulated site."""
        index = np.clip(np.asarray(x) - self.sites[0], 0, self.sites.size - 1)
        return self.values[index]

    def on(self, sites: np.ndarray) -> np.ndarray:
        return np.asarray(self.value_at(np.asarray(sites)), dtype=float)


@dataclass(frozen=True)
class CapacityValue:
    """cap(A, B) together with its logarithm."""

    A: FrozenSet[int]
    B: FrozenSet[int]
    value: float
    log_value: float

    @classmethod
    def from_log(cls, A, B, log_value: float) -> "CapacityValue":
        return cls(A=_sites(A), B=_sites(B), value=float(np.exp(log_value)), log_value=log_value)


@dataclass(frozen=True, eq=False)
class GreenFunction:
    """G_D(x, z) for x, z in D, stored densely in site order.

    Attributes:
        sites: Sites of D in increasing order
        matrix: matrix[i, j] = G_D(sites[i], sites[j])
    """

    sites: np.ndarray
    matrix: np.ndarray

    def _index(self, x: int) -> int:
        index = int(np.searchsorted(self.sites, x))
        if index >= self.sites.size or self.sites[index] != x:
            raise KeyError(x)
        return index

    def __call__(self, x: int, z: int) -> float:
        return float(self.matrix[self._index(x), self._index(z)])

    def mean_exit_times(self) -> np.ndarray:
        """E_x tau_{D^c} = sum_z G_D(x, z) for each x in D."""
        return self.matrix.sum(axis=1)


@dataclass(frozen=True)
class HittingMoments:
    """Exit-time moments from x for the interval (a, b).

    Attributes:
        mean_exit: E_x tau_{a,b}
        conditional_mean: E_x(tau_a 1{tau_a < tau_b}) / P_x(tau_a < tau_b)
        conditional_mean_b: The same quantity toward b
    """

    x: int
    a: int
    b: int
    mean_exit: float
    conditional_mean: float
    conditional_mean_b: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x": self.x, "a": self.a, "b": self.b,
            "mean_exit": self.mean_exit,
            "conditional_mean": self.conditional_mean,
            "conditional_mean_b": self.conditional_mean_b,
        }


@dataclass(frozen=True)
class SandwichCheck:
    """A computed quantity tested against an explicit [lower, upper] bracket."""

    name: str
    value: float
    lower: float
    upper: float
    detail: Optional[Tuple[Tuple[str, float], ...]] = None

    @property
    def holds(self) -> bool:
        return self.lower <= self.value <= self.upper

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "name": self.name,
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
            "holds": self.holds,
        }
        if self.detail:
            data.update(dict(self.detail))
        return data
