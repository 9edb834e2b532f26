"""Random environments, potentials and the reversible measure.

An environment assigns to every lattice site x of a finite window the
probability omega_x of jumping right. Its potential is the cumulative sum of
ln((1 - omega)/omega), normalized so that V(0) = 0. The potential of an
environment on [x_lo, x_hi] is defined on [x_lo - 1, x_hi], since the
increment V(x) - V(x - 1) consumes omega_x.
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional, Tuple

import numpy as np
from scipy import integrate

from sinaispectra.domain.exceptions import ConfigurationError, EllipticityError, WindowError
from sinaispectra.domain.path import Path

logger = logging.getLogger(__name__)

LawKind = Literal["two_point", "symmetric_uniform"]


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


def lipschitz_constant(kappa: float) -> float:
    """Largest possible |V(x+1) - V(x)| for a kappa-elliptic environment."""
    return abs(math.log(kappa / (1.0 - kappa)))


@dataclass(frozen=True)
class DisorderLaw:
    """Law of a single jump probability, symmetric under omega -> 1 - omega.

    Attributes:
        kind: "two_point" (omega = p or 1 - p with probability 1/2 each) or
            "symmetric_uniform" (omega uniform on [kappa, 1 - kappa])
        parameter: p for two_point, kappa for symmetric_uniform
    """

    kind: LawKind
    parameter: float

    def __post_init__(self):
        if self.kind == "two_point":
            if not 0.0 < self.parameter < 1.0:
                raise ConfigurationError(f"two_point law needs 0 < p < 1, got p={self.parameter}")
        elif self.kind == "symmetric_uniform":
            if not 0.0 < self.parameter < 0.5:
                raise ConfigurationError(
                    f"symmetric_uniform law needs 0 < kappa < 1/2, got kappa={self.parameter}"
                )
        else:
            raise ConfigurationError(f"Unknown disorder law: {self.kind}")

    @classmethod
    def two_point(cls, p: float) -> "DisorderLaw":
        return cls(kind="two_point", parameter=p)

    @classmethod
    def symmetric_uniform(cls, kappa: float) -> "DisorderLaw":
        return cls(kind="symmetric_uniform", parameter=kappa)

    @classmethod
    def from_spec(cls, text: str) -> "DisorderLaw":
        """Parse "two_point:0.3" or "symmetric_uniform:0.2"."""
        kind, _, value = text.partition(":")
        try:
            parameter = float(value)
        except ValueError:
            raise ConfigurationError(f"Invalid disorder law '{text}'")
        return cls(kind=kind.strip(), parameter=parameter)  # type: ignore[arg-type]

    @property
    def kappa(self) -> float:
        """Ellipticity margin guaranteed by the law."""
        if self.kind == "two_point":
            return min(self.parameter, 1.0 - self.parameter, 0.49)
        return self.parameter

    @property
    def is_degenerate(self) -> bool:
        return self.kind == "two_point" and self.parameter == 0.5

    @property
    def sigma2(self) -> float:
        """Variance of ln((1 - omega)/omega)."""
        if self.kind == "two_point":
            return math.log((1.0 - self.parameter) / self.parameter) ** 2
        kappa = self.parameter
        value, _ = integrate.quad(
            lambda u: math.log(u / (1.0 - u)) ** 2, kappa, 1.0 - kappa, limit=200
        )
        return value / (1.0 - 2.0 * kappa)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "two_point":
            p = self.parameter
            return np.where(rng.random(size) < 0.5, p, 1.0 - p)
        return rng.uniform(self.parameter, 1.0 - self.parameter, size)

    def describe(self) -> str:
        return f"{self.kind}:{self.parameter:g}"


@dataclass(frozen=True, eq=False)
class Environment:
    """Jump-right probabilities on the integer window [x_lo, x_hi]."""

    x_lo: int
    omega: np.ndarray
    kappa: float
    seed: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.kappa < 0.5:
            raise ConfigurationError(f"kappa must lie in (0, 1/2), got {self.kappa}")
        omega = _frozen(self.omega)
        if omega.ndim != 1 or omega.size == 0:
            raise WindowError("Environment window must be nonempty")
        slack = 1e-12
        bad = np.flatnonzero((omega < self.kappa - slack) | (omega > 1.0 - self.kappa + slack))
        if bad.size:
            site = self.x_lo + int(bad[0])
            raise ConfigurationError(
                f"omega={omega[bad[0]]:.6g} at site {site} violates kappa={self.kappa:g}"
            )
        object.__setattr__(self, "omega", omega)

    @property
    def x_hi(self) -> int:
        return self.x_lo + self.omega.size - 1

    @property
    def window(self) -> Tuple[int, int]:
        return (self.x_lo, self.x_hi)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.x_lo, self.x_hi + 1)

    def __len__(self) -> int:
        return int(self.omega.size)

    def contains(self, x: int) -> bool:
        return self.x_lo <= x <= self.x_hi

    def omega_at(self, x) -> np.ndarray:
        return self.omega[np.asarray(x) - self.x_lo]

    def restrict(self, lo: int, hi: int) -> "Environment":
        if lo > hi or not (self.contains(lo) and self.contains(hi)):
            raise WindowError(f"[{lo}, {hi}] is not inside the window {self.window}")
        return Environment(
            x_lo=lo,
            omega=self.omega[lo - self.x_lo : hi - self.x_lo + 1],
            kappa=self.kappa,
            seed=self.seed,
        )


@dataclass(frozen=True, eq=False)
class Potential:
    """Potential values V(x) on the integer window [x_lo, x_lo + len - 1]."""

    x_lo: int
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1 or values.size < 2:
            raise WindowError("A potential needs at least two sites")
        if not np.all(np.isfinite(values)):
            raise ValueError("Potential values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def x_hi(self) -> int:
        return self.x_lo + self.values.size - 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.x_lo, self.x_hi + 1)

    def contains(self, x: int) -> bool:
        return self.x_lo <= x <= self.x_hi

    def value_at(self, x) -> np.ndarray:
        return self.values[np.asarray(x) - self.x_lo]

    def increments(self) -> np.ndarray:
        """V(x) - V(x - 1) for x in [x_lo + 1, x_hi]."""
        return np.diff(self.values)

    def to_path(self) -> Path:
        return Path(self.sites.astype(float), self.values)


@dataclass(frozen=True, eq=False)
class RescaledPotential:
    """V_N(k/N) = V(k)/sqrt(N) on the lattice Z/N, extended linearly."""

    N: int
    abscissae: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "abscissae", _frozen(self.abscissae))
        object.__setattr__(self, "values", _frozen(self.values))

    def value_at(self, t):
        return np.interp(t, self.abscissae, self.values)

    def site_of(self, t: float) -> int:
        """Lattice site k with k/N closest to t."""
        return int(round(t * self.N))

    def to_path(self) -> Path:
        return Path(self.abscissae, self.values)


@dataclass(frozen=True, eq=False)
class ReversibleMeasure:
    """mu(x) = exp(-V(x))/omega_x on the environment window, kept in log form."""

    x_lo: int
    log_weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "log_weights", _frozen(self.log_weights))

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.x_lo, self.x_lo + self.log_weights.size)

    def log_at(self, x) -> np.ndarray:
        return self.log_weights[np.asarray(x) - self.x_lo]


def sample_environment(
    law: DisorderLaw,
    window: Tuple[int, int],
    seed: int,
    kappa: Optional[float] = None,
) -> Environment:
    """Draw i.i.d. jump probabilities from `law` on the integer window.

    Args:
        law: Disorder law
        window: (x_lo, x_hi), inclusive
        seed: Seed of the numpy generator; equal seeds give equal environments
        kappa: Ellipticity margin to record (defaults to the law's own)

    Returns:
        Sampled Environment
    """
    x_lo, x_hi = window
    if x_hi < x_lo:
        raise WindowError(f"Empty window {window}")
    rng = np.random.default_rng(seed)
    omega = law.draw(rng, x_hi - x_lo + 1)
    return Environment(
        x_lo=x_lo, omega=omega, kappa=law.kappa if kappa is None else kappa, seed=seed
    )


def potential_of(env: Environment) -> Potential:
    """V(0) = 0 and V(x) - V(x - 1) = ln((1 - omega_x)/omega_x)."""
    if not env.x_lo - 1 <= 0 <= env.x_hi:
        raise WindowError(f"Site 0 is outside the potential window of {env.window}")
    increments = np.log1p(-env.omega) - np.log(env.omega)
    values = np.concatenate(([0.0], np.cumsum(increments)))
    # values[i] is V(x_lo - 1 + i)
    values = values - values[-env.x_lo + 1]
    return Potential(x_lo=env.x_lo - 1, values=values)


def environment_of(potential: Potential, kappa: float) -> Environment:
    """Invert potential_of: omega_x = 1/(1 + exp(V(x) - V(x - 1))).

    Raises:
        EllipticityError: If an increment exceeds ln((1 - kappa)/kappa)
    """
    bound = lipschitz_constant(kappa)
    increments = potential.increments()
    excess = np.flatnonzero(np.abs(increments) > bound * (1.0 + 1e-12))
    if excess.size:
        index = int(excess[0])
        raise EllipticityError(potential.x_lo + 1 + index, float(increments[index]), bound)
    omega = 1.0 / (1.0 + np.exp(increments))
    omega = np.clip(omega, kappa, 1.0 - kappa)
    return Environment(x_lo=potential.x_lo + 1, omega=omega, kappa=kappa)


def rescale(
    potential: Potential, N: int, interval: Tuple[float, float] = (-1.0, 1.0)
) -> RescaledPotential:
    """Rescaled potential V_N(k/N) = V(k)/sqrt(N) on the lattice points of `interval`.

    Raises:
        WindowError: If the potential does not cover [interval[0] N, interval[1] N]
    """
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    k_lo = math.floor(interval[0] * N)
    k_hi = math.ceil(interval[1] * N)
    if not (potential.contains(k_lo) and potential.contains(k_hi)):
        raise WindowError(
            f"Potential window [{potential.x_lo}, {potential.x_hi}] does not cover "
            f"[{k_lo}, {k_hi}] needed for N={N}"
        )
    ks = np.arange(k_lo, k_hi + 1)
    return RescaledPotential(
        N=N, abscissae=ks / N, values=potential.value_at(ks) / math.sqrt(N)
    )


def reversible_measure(env: Environment) -> ReversibleMeasure:
    potential = potential_of(env)
    log_weights = -potential.value_at(env.sites) - np.log(env.omega)
    return ReversibleMeasure(x_lo=env.x_lo, log_weights=log_weights)


def apply_generator(env: Environment, f: np.ndarray) -> np.ndarray:
    """(Lf)(x) = f(x) - omega_x f(x+1) - (1 - omega_x) f(x-1) on interior sites.

    `f` is indexed by the environment window; the first and last entries
    of the result are left at zero.
    """
    result = np.zeros_like(f, dtype=float)
    omega = env.omega[1:-1]
    result[1:-1] = f[1:-1] - omega * f[2:] - (1.0 - omega) * f[:-2]
    return result


def dirichlet_form(env: Environment, f: np.ndarray) -> float:
    """Sum over bonds of mu(x) omega_x (f(x+1) - f(x))^2 for f on the window."""
    potential = potential_of(env)
    # mu(x) omega_x = exp(-V(x))
    bond_weights = np.exp(-potential.value_at(env.sites[:-1]))
    return float(np.sum(bond_weights * np.diff(f) ** 2))


def generator_inner_product(env: Environment, f: np.ndarray) -> float:
    """(f, Lf)_mu for f vanishing on the two window edges."""
    measure = reversible_measure(env)
    return float(np.sum(measure.weights * f * apply_generator(env, f)))
