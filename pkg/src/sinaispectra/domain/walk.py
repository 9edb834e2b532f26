"""Value types for walk simulation, origin valleys, localization and relaxation"""

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from sinaispectra.domain.constants import RELAXATION_MONOTONE_TOLERANCE


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Summary of one simulated trajectory.

    Attributes:
        occupation: Number of visits (times 0..steps) to each requested site set
        positions: Full trajectory when recording was requested
    """

    start: int
    steps: int
    endpoint: int
    occupation: Dict[str, int] = field(default_factory=dict)
    positions: Optional[np.ndarray] = None
    seed: Optional[int] = None


@dataclass(frozen=True)
class HittingEstimate:
    """Monte Carlo estimates of hitting quantities from x, with standard errors.

    Attributes:
        probability: P_x(tau_A < tau_B)
        mean_exit: E_x tau_{A u B}
        conditional_mean: E_x(tau_A | tau_A < tau_B), nan when A was never hit first
        conditional_mean_b: E_x(tau_B | tau_B < tau_A), nan when B was never hit first
    """

    x: int
    trials: int
    probability: float
    probability_se: float
    mean_exit: float
    mean_exit_se: float
    conditional_mean: float
    conditional_mean_se: float
    conditional_mean_b: float
    conditional_mean_b_se: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ValleyTriple:
    """Consecutive extrema (m1, m, m2) of the valley covering the origin.

    m1 < 0 <= m2 are the nearest h-maxima around 0 and m is the h-minimum between them.
    """

    left: float
    bottom: float
    right: float


@dataclass(frozen=True)
class OriginValley:
    """The ln n-valley of the potential covering the origin.

    Attributes:
        n: Time scale
        h: ln n, the valley depth scale
        a, m, b: Left barrier, bottom and right barrier (lattice sites)
        depths: (V(a) - V(m), V(b) - V(m))
        delta_n: Localization half-width in units of ln^2 n
    """

    n: float
    h: float
    a: int
    m: int
    b: int
    depths: Tuple[float, float]
    delta_n: float

    @property
    def scale(self) -> float:
        """ln^2 n, the spatial scale of the valley."""
        return self.h ** 2

    @property
    def rescaled_bottom(self) -> float:
        return self.m / self.scale

    @property
    def box(self) -> Tuple[int, int]:
        """Inclusive site range of A_n = (a, b)."""
        return (self.a + 1, self.b - 1)

    @property
    def box_size(self) -> int:
        return self.b - self.a - 1

    @property
    def half_width(self) -> float:
        return self.delta_n * self.scale

    @property
    def target(self) -> Tuple[int, int]:
        """Inclusive site range of D_n: |x - m| < delta_n ln^2 n within A_n."""
        reach = math.ceil(self.half_width) - 1
        return (max(self.m - reach, self.a + 1), min(self.m + reach, self.b - 1))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["depths"] = list(self.depths)
        data["box"] = list(self.box)
        data["target"] = list(self.target)
        data["rescaled_bottom"] = self.rescaled_bottom
        return data


@dataclass(frozen=True)
class Screening:
    """Geometric screen of the valley covering the origin.

    Each condition is evaluated on the rescaled potential x -> V(x ln^2 n)/ln n.
    """

    conditions: Dict[str, bool]
    delta: float
    delta_prime: float
    beta: float

    @property
    def passed(self) -> bool:
        return all(self.conditions.values())

    @property
    def failures(self) -> Tuple[str, ...]:
        return tuple(name for name, ok in self.conditions.items() if not ok)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "conditions": dict(self.conditions),
            "delta": self.delta,
            "delta_prime": self.delta_prime,
            "beta": self.beta,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class ValleyIdentities:
    """Deviations of the valley equilibrium potential h = h_{m, A^c} from its limits.

    Attributes:
        origin: |h(0) - 1|
        overlap: |(h, 1_D) / ||h||^2 - 1|
        norm_ratio: | ||1_D|| / ||h|| - 1 |
    """

    origin: float
    overlap: float
    norm_ratio: float

    def holds(self, tolerance: float = 0.05) -> bool:
        return max(self.origin, self.overlap, self.norm_ratio) <= tolerance

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["holds"] = self.holds()
        return data


@dataclass(frozen=True)
class ExitProbability:
    """P_0(tau_{A^c} >= T) from the spectral propagator of L(A).

    Attributes:
        survival: P_0(tau_{A^c} >= T)
        principal: Principal eigenvalue of L(A)
    """

    steps: int
    survival: float
    principal: float

    @property
    def exit(self) -> float:
        return 1.0 - self.survival

    @property
    def scaled_time(self) -> float:
        return self.steps * self.principal

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["exit"] = self.exit
        data["scaled_time"] = self.scaled_time
        return data


@dataclass(frozen=True)
class LocalizationReport:
    """In-valley probability at time n: exact spectral lower bound and Monte Carlo.

    Attributes:
        spectral_lower: (1/mu(0)) (1_0, P(A_n)^n 1_{D_n}), None when the box is too large
        mc_estimate, mc_se: Direct estimate of P_0(X_n in D_n), None without trials
        initial_residual: |propagator at time 0 - 1_{D_n}(0)|
        flagged: Reason the spectral bound was skipped
    """

    valley: OriginValley
    screening: Screening
    spectral_lower: Optional[float]
    mc_estimate: Optional[float] = None
    mc_se: Optional[float] = None
    mc_trials: int = 0
    initial_residual: Optional[float] = None
    identities: Optional[ValleyIdentities] = None
    flagged: Optional[str] = None

    @property
    def consistent(self) -> bool:
        """MC estimate is not below the spectral lower bound by more than 3 SE."""
        if self.spectral_lower is None or self.mc_estimate is None:
            return True
        return self.mc_estimate >= self.spectral_lower - 3.0 * (self.mc_se or 0.0) - 1e-12

    def to_dict(self) -> Dict[str, Any]:
        return {
            "valley": self.valley.to_dict(),
            "screening": self.screening.to_dict(),
            "spectral_lower": self.spectral_lower,
            "mc_estimate": self.mc_estimate,
            "mc_se": self.mc_se,
            "mc_trials": self.mc_trials,
            "initial_residual": self.initial_residual,
            "identities": self.identities.to_dict() if self.identities else None,
            "flagged": self.flagged,
            "consistent": self.consistent,
        }


@dataclass(frozen=True, eq=False)
class RelaxationCurve:
    """P_0(X_{floor(t / Lambda_k)} in D_{n_k}) against 1 - exp(-t) for one box.

    Attributes:
        k: Box index (box 0 is the starting valley)
        rate: Lambda_k, the second eigenvalue of L(A_{n_k})
        thresholds: Smallest rescaled heights at which the box holds 1, 2, 3 minima
        separated: Consecutive thresholds differ by at least the screening delta
        intermediate: I_{k,2} at T_k = exp((H_2 + H_3)/2) with H_i = thresholds[i] ln n_k
        exit: Probability of leaving A_{n_k} before the last grid time
    """

    k: int
    valley: OriginValley
    rate: float
    t_grid: np.ndarray
    probabilities: np.ndarray
    thresholds: Tuple[float, float, float]
    separated: bool
    intermediate: float
    intermediate_time: float
    exit: Optional[ExitProbability] = None

    @property
    def target(self) -> np.ndarray:
        return 1.0 - np.exp(-self.t_grid)

    @property
    def sup_deviation(self) -> float:
        return float(np.max(np.abs(self.probabilities - self.target)))

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.probabilities) >= -RELAXATION_MONOTONE_TOLERANCE))

    @property
    def in_range(self) -> bool:
        return bool(np.all((self.probabilities >= -1e-9) & (self.probabilities <= 1.0 + 1e-9)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "valley": self.valley.to_dict(),
            "rate": self.rate,
            "t_grid": self.t_grid.tolist(),
            "probabilities": self.probabilities.tolist(),
            "target": self.target.tolist(),
            "sup_deviation": self.sup_deviation,
            "monotone": self.monotone,
            "in_range": self.in_range,
            "thresholds": list(self.thresholds),
            "separated": self.separated,
            "intermediate": self.intermediate,
            "intermediate_time": self.intermediate_time,
            "exit": self.exit.to_dict() if self.exit else None,
        }


@dataclass(frozen=True)
class RelaxationReport:
    """Relaxation curves of successive boxes and the trap rates Lambda_k."""

    curves: Tuple[RelaxationCurve, ...]
    boxes: Tuple[OriginValley, ...]
    flagged: Optional[str] = None

    @property
    def rates(self) -> Tuple[float, ...]:
        return tuple(curve.rate for curve in self.curves)

    @property
    def partial(self) -> bool:
        return self.flagged is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "curves": [curve.to_dict() for curve in self.curves],
            "boxes": [box.to_dict() for box in self.boxes],
            "rates": list(self.rates),
            "flagged": self.flagged,
        }


@dataclass(frozen=True, eq=False)
class AnnealedReport:
    """Empirical law of sigma^2 m^(n) / ln^2 n over environments against the limit density."""

    n: float
    samples: np.ndarray
    skipped: int
    ks_statistic: float
    ks_pvalue: float
    level: float = 1e-3

    @property
    def passed(self) -> bool:
        return self.ks_pvalue > self.level

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "count": int(self.samples.size),
            "skipped": self.skipped,
            "mean": float(np.mean(self.samples)) if self.samples.size else None,
            "ks_statistic": self.ks_statistic,
            "ks_pvalue": self.ks_pvalue,
            "level": self.level,
            "passed": self.passed,
        }


def annealed_terms(tolerance: float) -> int:
    """Terms of the limit CDF series until (2k+1)^-3 drops below tolerance."""
    return max(1, int(math.ceil(0.5 * (tolerance ** (-1.0 / 3.0) - 1.0))) + 1)


def annealed_density(x, tolerance: float = 1e-12) -> np.ndarray:
    """(2/pi) sum_k (-1)^k/(2k+1) exp(-(2k+1)^2 pi^2 |x| / 8).

    The series converges slowly at x = 0, where it sums to 1/2.
    """
    x = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    rate = math.pi ** 2 / 8.0
    terms = max(10, int(math.ceil(math.sqrt(-math.log(tolerance) / (rate * max(x.min(), 1e-6))))))
    terms = min(terms, annealed_terms(tolerance))
    odd = 2 * np.arange(terms) + 1
    signs = np.where(np.arange(terms) % 2 == 0, 1.0, -1.0)
    exponent = np.exp(-np.outer(x, odd ** 2) * rate)
    return 2.0 / math.pi * exponent @ (signs / odd)


def annealed_cdf(x, tolerance: float = 1e-12) -> np.ndarray:
    """P(L <= x) = 1 - (16/pi^3) sum_k (-1)^k/(2k+1)^3 exp(-(2k+1)^2 pi^2 x / 8) for x >= 0."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    terms = annealed_terms(tolerance)
    odd = 2 * np.arange(terms) + 1
    signs = np.where(np.arange(terms) % 2 == 0, 1.0, -1.0)
    exponent = np.exp(-np.outer(np.abs(x), odd ** 2) * math.pi ** 2 / 8.0)
    tail = 16.0 / math.pi ** 3 * exponent @ (signs / odd ** 3)
    return np.where(x >= 0, 1.0 - tail, tail)
