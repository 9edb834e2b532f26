"""Continuous piecewise-linear paths"""

from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class Path:
    """Piecewise-linear function through (abscissae[i], ordinates[i]).

    Attributes:
        abscissae: Strictly increasing vertex positions
        ordinates: Path values at the vertices
    """

    abscissae: np.ndarray
    ordinates: np.ndarray

    def __post_init__(self):
        t = np.array(self.abscissae, dtype=float)
        v = np.array(self.ordinates, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("abscissae and ordinates must be 1-D arrays of equal length")
        if t.size < 2:
            raise ValueError("A path needs at least two points")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValueError("Path points must be finite")
        if np.any(np.diff(t) <= 0):
            raise ValueError("Path abscissae must be strictly increasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "abscissae", t)
        object.__setattr__(self, "ordinates", v)

    @classmethod
    def from_points(cls, points: Iterable[Tuple[float, float]]) -> "Path":
        pairs = list(points)
        return cls(np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))

    def __len__(self) -> int:
        return int(self.abscissae.size)

    @property
    def start(self) -> float:
        return float(self.abscissae[0])

    @property
    def end(self) -> float:
        return float(self.abscissae[-1])

    @property
    def scale(self) -> float:
        """max |gamma|, used to make tie tolerances relative."""
        return float(np.max(np.abs(self.ordinates)))

    def contains(self, t: float) -> bool:
        return self.start <= t <= self.end

    def value_at(self, t):
        return np.interp(t, self.abscissae, self.ordinates)

    def argmax_between(self, s: float, t: float, tolerance: float = 0.0) -> Tuple[float, float]:
        """Smallest point of [s, t] where the path attains its maximum there.

        Returns:
            (abscissa, value) of the leftmost maximizer; values within
            `tolerance` of the maximum count as attaining it
        """
        lo, hi = min(s, t), max(s, t)
        inner = np.flatnonzero((self.abscissae > lo) & (self.abscissae < hi))
        candidates_t = np.concatenate(([lo], self.abscissae[inner], [hi]))
        candidates_v = np.concatenate(
            ([self.value_at(lo)], self.ordinates[inner], [self.value_at(hi)])
        )
        top = float(np.max(candidates_v))
        first = int(np.flatnonzero(candidates_v >= top - tolerance)[0])
        return float(candidates_t[first]), top

    def max_between(self, s: float, t: float) -> float:
        return self.argmax_between(s, t)[1]

    def min_between(self, s: float, t: float) -> float:
        lo, hi = min(s, t), max(s, t)
        inner = (self.abscissae > lo) & (self.abscissae < hi)
        values = np.concatenate(
            ([self.value_at(lo)], self.ordinates[inner], [self.value_at(hi)])
        )
        return float(np.min(values))

    def scaled(self, factor: float, shift: float = 0.0) -> "Path":
        return Path(self.abscissae, factor * self.ordinates + shift)

    def negated(self) -> "Path":
        return Path(self.abscissae, -self.ordinates)

    def restrict(self, lo: float, hi: float) -> "Path":
        """Sub-path on [lo, hi] with interpolated endpoints."""
        inner = (self.abscissae > lo) & (self.abscissae < hi)
        t = np.concatenate(([lo], self.abscissae[inner], [hi]))
        v = np.concatenate(([self.value_at(lo)], self.ordinates[inner], [self.value_at(hi)]))
        return Path(t, v)

    def sup_distance(self, other: "Path") -> float:
        """L-infinity distance, evaluated on the union of both vertex sets."""
        grid = np.union1d(self.abscissae, other.abscissae)
        return float(np.max(np.abs(self.value_at(grid) - other.value_at(grid))))
