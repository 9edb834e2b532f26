"""Brownian samples, h-slope statistics and the renewal laws of Brownian h-extrema.

The spacing X between consecutive h-extrema of a Brownian motion with
diffusion scale sigma has Laplace transform 1/cosh(h sqrt(2 lambda)/sigma).
For h = sigma = 1 its density is the alternating series

    f(x) = (pi/2) sum_{k>=0} (-1)^k (2k+1) exp(-(2k+1)^2 pi^2 x / 8),   x > 0,

and the general case follows by the scaling x -> x sigma^2 / h^2.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from sinaispectra.domain.constants import MIN_SERIES_TERMS, SERIES_TOLERANCE
from sinaispectra.domain.path import Path

# Below this standardized spacing the density is under 1e-18 and is set to zero
SMALL_SPACING = 0.01


@dataclass(frozen=True, eq=False)
class BrownianSample:
    """One two-sided Brownian path on a regular grid through t = 0.

    Attributes:
        sigma: Diffusion scale (Var B_t = sigma^2 |t|)
        dt: Grid step
        span: (lo, hi) covered by the grid
        path: Piecewise-linear interpolation of the grid values
        seed: Seed the path was drawn from
        envelope: Grid values with the bridge maximum and minimum of every grid
            cell inserted, so that h-extrema take their exact values
    """

    sigma: float
    dt: float
    span: Tuple[float, float]
    path: Path
    seed: Optional[int] = None
    envelope: Optional[Path] = None

    def value_at(self, t):
        return self.path.value_at(t)

    @property
    def extrema_path(self) -> Path:
        return self.envelope if self.envelope is not None else self.path


@dataclass(frozen=True, eq=False)
class SlopeStatistics:
    """Stationary statistics of the interior h-slopes of a batch of paths.

    Attributes:
        heights: |B(S_{n+1}) - B(S_n)| - h per interior slope
        spacings: S_{n+1} - S_n per interior slope
        ks_statistic, ks_pvalue: KS test of `heights` against Exp(mean h)
        spacing_ks_statistic, spacing_ks_pvalue: KS test of `spacings` against the series law
        laplace: Per lambda, empirical E exp(-lambda X), its standard error and 1/cosh target
    """

    h: float
    sigma: float
    heights: np.ndarray
    spacings: np.ndarray
    ks_statistic: float
    ks_pvalue: float
    spacing_ks_statistic: float
    spacing_ks_pvalue: float
    laplace: Tuple[Dict[str, float], ...] = ()

    @property
    def count(self) -> int:
        return int(self.heights.size)

    @property
    def spacing_mean(self) -> float:
        return float(np.mean(self.spacings))

    @property
    def spacing_target(self) -> float:
        return self.h ** 2 / self.sigma ** 2

    @property
    def spacing_mean_error(self) -> float:
        return abs(self.spacing_mean / self.spacing_target - 1.0)

    def laplace_ok(self, gate: float = 3.0) -> bool:
        return all(
            abs(row["empirical"] - row["target"]) <= gate * row["se"] for row in self.laplace
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "h": self.h,
            "sigma": self.sigma,
            "count": self.count,
            "height_mean": float(np.mean(self.heights)),
            "ks_statistic": self.ks_statistic,
            "ks_pvalue": self.ks_pvalue,
            "spacing_mean": self.spacing_mean,
            "spacing_target": self.spacing_target,
            "spacing_mean_error": self.spacing_mean_error,
            "spacing_ks_statistic": self.spacing_ks_statistic,
            "spacing_ks_pvalue": self.spacing_ks_pvalue,
            "laplace": [dict(row) for row in self.laplace],
        }


@dataclass(frozen=True, eq=False)
class SpacingLaw:
    """Spacing density, its size-biased variant and CDFs on a grid.

    Attributes:
        terms: Number of series terms used
        raised: True when `terms` had to exceed the requested kmax
        truncation_error: First omitted term, bounding the alternating remainder
    """

    x_grid: np.ndarray
    density: np.ndarray
    size_biased: np.ndarray
    cdf: np.ndarray
    renewal_cdf: np.ndarray
    terms: int
    raised: bool
    truncation_error: float


@dataclass(frozen=True)
class FrequencyCheck:
    """Empirical frequency of an event against an evaluated upper bound."""

    name: str
    parameter: float
    frequency: float
    se: float
    bound: Optional[float] = None

    @property
    def holds(self) -> bool:
        return self.bound is None or self.frequency <= self.bound + 3.0 * self.se

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["holds"] = self.holds
        return data


@dataclass(frozen=True)
class TailReport:
    """Count tail, degeneracy-event frequencies and the Bessel(3) escape check.

    `shape_ok` collects the monotonicity checks: every event frequency
    shrinks as its small parameter shrinks.
    """

    h: float
    sigma: float
    paths: int
    count_tail: Tuple[FrequencyCheck, ...]
    at_least_four: float
    slope_events: Tuple[FrequencyCheck, ...]
    gap_events: Tuple[FrequencyCheck, ...]
    flat_events: Tuple[FrequencyCheck, ...]
    bessel: Tuple[FrequencyCheck, ...]
    fitted_constants: Dict[str, float] = field(default_factory=dict)

    @property
    def bounds_ok(self) -> bool:
        return all(check.holds for check in self.count_tail + self.bessel)

    @property
    def shape_ok(self) -> bool:
        def shrinking(checks: Tuple[FrequencyCheck, ...]) -> bool:
            ordered = sorted(checks, key=lambda check: check.parameter)
            return all(
                a.frequency <= b.frequency + 1e-15 for a, b in zip(ordered, ordered[1:])
            )

        return all(
            shrinking(group)
            for group in (self.slope_events, self.gap_events, self.flat_events, self.bessel)
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "h": self.h,
            "sigma": self.sigma,
            "paths": self.paths,
            "count_tail": [c.to_dict() for c in self.count_tail],
            "at_least_four": self.at_least_four,
            "slope_events": [c.to_dict() for c in self.slope_events],
            "gap_events": [c.to_dict() for c in self.gap_events],
            "flat_events": [c.to_dict() for c in self.flat_events],
            "bessel": [c.to_dict() for c in self.bessel],
            "fitted_constants": dict(self.fitted_constants),
            "bounds_ok": self.bounds_ok,
            "shape_ok": self.shape_ok,
        }


@dataclass(frozen=True)
class TwoSampleCheck:
    """Comparison of a functional between two samples.

    Either a KS p-value or a difference with its standard error is filled in.
    """

    name: str
    statistic: float
    pvalue: Optional[float] = None
    difference: Optional[float] = None
    se: Optional[float] = None
    passed: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class KmtReport:
    """Distributional comparison of rescaled potentials with Brownian paths."""

    N: int
    paths: int
    checks: Tuple[TwoSampleCheck, ...]
    acceptance_potential: float
    acceptance_brownian: float

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "paths": self.paths,
            "checks": [c.to_dict() for c in self.checks],
            "acceptance_potential": self.acceptance_potential,
            "acceptance_brownian": self.acceptance_brownian,
            "passed": self.passed,
        }


def series_terms(x_min: float, kmax: int = MIN_SERIES_TERMS) -> Tuple[int, bool]:
    """Terms needed for the spacing series to be decreasing and below tolerance at x_min.

    Returns:
        (terms, raised) where raised reports that kmax was not enough
    """
    if x_min <= 0:
        raise ValueError(f"x_min must be positive, got {x_min}")
    rate = math.pi ** 2 * max(x_min, SMALL_SPACING) / 8.0
    terms = max(kmax, MIN_SERIES_TERMS)
    peak = 1.0 / math.sqrt(2.0 * rate)
    m = 2 * terms + 1
    while m <= peak or m * math.exp(-m * m * rate) >= SERIES_TOLERANCE:
        terms *= 2
        m = 2 * terms + 1
    return terms, terms > kmax


def standard_density(x, terms: int) -> np.ndarray:
    """Truncated series for the spacing density at h = sigma = 1."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    odd = 2 * np.arange(terms) + 1
    signs = np.where(np.arange(terms) % 2 == 0, 1.0, -1.0)
    positive = np.clip(x, 0.0, None)
    exponent = np.exp(-np.outer(positive, odd ** 2) * math.pi ** 2 / 8.0)
    values = math.pi / 2.0 * exponent @ (signs * odd)
    return np.where(x >= SMALL_SPACING, np.clip(values, 0.0, None), 0.0)


def standard_survival(x, terms: int) -> np.ndarray:
    """P(X > x) at h = sigma = 1, by termwise integration of the density."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    odd = 2 * np.arange(terms) + 1
    signs = np.where(np.arange(terms) % 2 == 0, 1.0, -1.0)
    positive = np.clip(x, 0.0, None)
    exponent = np.exp(-np.outer(positive, odd ** 2) * math.pi ** 2 / 8.0)
    values = 4.0 / math.pi * exponent @ (signs / odd)
    return np.where(x >= SMALL_SPACING, np.clip(values, 0.0, 1.0), 1.0)


def spacing_density(x, h: float = 1.0, sigma: float = 1.0, kmax: int = MIN_SERIES_TERMS):
    """Density of the h-slope spacing for diffusion scale sigma."""
    scale = sigma ** 2 / h ** 2
    x = np.atleast_1d(np.asarray(x, dtype=float))
    positive = x[x > 0]
    terms, _ = series_terms(float(np.min(positive)) * scale if positive.size else 1.0, kmax)
    return scale * standard_density(x * scale, terms)


def spacing_cdf(x, h: float = 1.0, sigma: float = 1.0, kmax: int = MIN_SERIES_TERMS):
    scale = sigma ** 2 / h ** 2
    x = np.atleast_1d(np.asarray(x, dtype=float))
    positive = x[x > 0]
    terms, _ = series_terms(float(np.min(positive)) * scale if positive.size else 1.0, kmax)
    return 1.0 - standard_survival(x * scale, terms)


def count_tail_bound(n: int, h: float, sigma: float) -> float:
    """e (1 + h^2 / (2 sigma^2))^(-n)."""
    return math.e * (1.0 + h ** 2 / (2.0 * sigma ** 2)) ** (-n)


def bessel_escape_bound(t: float, eps: float) -> float:
    """sqrt(2) eps / sqrt(pi t)."""
    return math.sqrt(2.0) * eps / math.sqrt(math.pi * t)


@dataclass(frozen=True)
class RefinementCheck:
    """Stability of h-extrema counts when the grid step is halved."""

    paths: int
    unchanged: int
    threshold: float = 0.99

    @property
    def unchanged_fraction(self) -> float:
        return self.unchanged / self.paths if self.paths else 1.0

    @property
    def passed(self) -> bool:
        return self.unchanged_fraction >= self.threshold

    def to_dict(self) -> Dict[str, Any]:
        return {
            "paths": self.paths,
            "unchanged": self.unchanged,
            "unchanged_fraction": self.unchanged_fraction,
            "threshold": self.threshold,
            "passed": self.passed,
        }
