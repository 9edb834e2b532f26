"""Dirichlet generators L(D) = I - P restricted to a domain D, and their symmetrization.

D is an integer interval minus a set of holes. The walk is killed as soon as
it leaves D, so rows couple x only to x - 1 and x + 1 when those sites are
in D. Conjugating by mu^(1/2) turns L(D) into a symmetric Jacobi matrix H.
"""

from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from sinaispectra.domain.constants import SELF_ADJOINT_TOLERANCE
from sinaispectra.domain.environment import Environment, reversible_measure
from sinaispectra.domain.exceptions import AdjointnessError, WindowError


@dataclass(frozen=True, eq=False)
class SymmetricTridiagonal:
    """Symmetric Jacobi matrix H with diagonal `diag` and off-diagonal `off`.

    Attributes:
        diag: Diagonal entries (length n)
        off: Off-diagonal entries H[i, i+1] (length n - 1)
        half_log_mu: log mu(x)^(1/2) on the domain, for mapping back to L(D)
    """

    diag: np.ndarray
    off: np.ndarray
    half_log_mu: np.ndarray

    @property
    def size(self) -> int:
        return int(self.diag.size)

    @property
    def norm_one(self) -> float:
        """Induced 1-norm (max absolute column sum)."""
        column = np.abs(self.diag).copy()
        column[:-1] += np.abs(self.off)
        column[1:] += np.abs(self.off)
        return float(np.max(column))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        result = self.diag[:, None] * v if v.ndim == 2 else self.diag * v
        if self.size > 1:
            if v.ndim == 2:
                result[:-1] += self.off[:, None] * v[1:]
                result[1:] += self.off[:, None] * v[:-1]
            else:
                result[:-1] += self.off * v[1:]
                result[1:] += self.off * v[:-1]
        return result

    def banded(self, shift: float = 0.0) -> np.ndarray:
        """(H - shift) in the (1, 1) banded layout used by scipy.linalg.solve_banded."""
        ab = np.zeros((3, self.size))
        ab[1] = self.diag - shift
        if self.size > 1:
            ab[0, 1:] = self.off
            ab[2, :-1] = self.off
        return ab

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def to_symmetric(self, f: np.ndarray) -> np.ndarray:
        """v = mu^(1/2) f."""
        scale = np.exp(self.half_log_mu)
        return scale[:, None] * f if f.ndim == 2 else scale * f

    def from_symmetric(self, v: np.ndarray) -> np.ndarray:
        """f = mu^(-1/2) v."""
        scale = np.exp(-self.half_log_mu)
        return scale[:, None] * v if v.ndim == 2 else scale * v


def sturm_counts(diag: np.ndarray, off: np.ndarray, lams) -> np.ndarray:
    """Number of eigenvalues of the Jacobi matrix strictly below each lambda.

    Counts negative pivots of the LDL^T factorization of H - lambda; the
    recurrence is vectorized over the lambdas.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    tiny = np.finfo(float).tiny
    counts = np.zeros(lams.shape, dtype=int)
    pivot = diag[0] - lams
    for i in range(diag.size):
        if i > 0:
            safe = np.where(pivot == 0.0, tiny, pivot)
            pivot = diag[i] - lams - off[i - 1] ** 2 / safe
        counts += pivot < 0
    return counts


@dataclass(frozen=True, eq=False)
class DirichletGenerator:
    """L(D) on the ordered sites of D.

    Attributes:
        sites: Sites of D in increasing order
        upper: L[x, x+1] = -omega_x where x + 1 is also in D, else 0
        lower: L[x+1, x] = -(1 - omega_{x+1}) where x is also in D, else 0
        log_mu: log of the reversible measure on D
        N: Scale attached to the domain (1 for unscaled lattice use)
        self_adjoint_residual: max relative |mu(x) L[x,y] - mu(y) L[y,x]|
    """

    sites: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    log_mu: np.ndarray
    N: int = 1
    self_adjoint_residual: float = 0.0

    @classmethod
    def build(
        cls,
        env: Environment,
        interval: Tuple[int, int],
        holes: Optional[Iterable[int]] = None,
        N: int = 1,
    ) -> "DirichletGenerator":
        """Generator of the walk killed outside [interval] minus `holes`.

        Raises:
            WindowError: If the domain is empty or leaves the environment window
            AdjointnessError: If detailed balance fails beyond tolerance
        """
        lo, hi = interval
        if not (env.contains(lo) and env.contains(hi)):
            raise WindowError(f"Interval {interval} is not inside the window {env.window}")
        hole_set = {int(x) for x in (holes or ())}
        sites = np.array([x for x in range(lo, hi + 1) if x not in hole_set], dtype=int)
        if sites.size == 0:
            raise WindowError("Dirichlet domain is empty")

        omega = env.omega_at(sites)
        log_mu = reversible_measure(env).log_at(sites)
        adjacent = np.diff(sites) == 1
        upper = np.where(adjacent, -omega[:-1], 0.0)
        lower = np.where(adjacent, -(1.0 - omega[1:]), 0.0)

        residual = 0.0
        if adjacent.any():
            forward = np.exp(log_mu[:-1]) * upper
            backward = np.exp(log_mu[1:]) * lower
            scale = np.maximum(np.abs(forward), np.abs(backward))
            mask = scale > 0
            if mask.any():
                residual = float(np.max(np.abs(forward - backward)[mask] / scale[mask]))
        if residual > SELF_ADJOINT_TOLERANCE:
            raise AdjointnessError(f"Self-adjointness residual {residual:.3e} exceeds tolerance")

        return cls(
            sites=sites, upper=upper, lower=lower, log_mu=log_mu, N=N,
            self_adjoint_residual=residual,
        )

    @property
    def size(self) -> int:
        return int(self.sites.size)

    @property
    def is_interval(self) -> bool:
        return bool(np.all(np.diff(self.sites) == 1))

    def index_of(self, x: int) -> int:
        index = int(np.searchsorted(self.sites, x))
        if index >= self.size or self.sites[index] != x:
            raise WindowError(f"Site {x} is not in the Dirichlet domain")
        return index

    def symmetrized(self) -> SymmetricTridiagonal:
        """H = mu^(1/2) L(D) mu^(-1/2), off-diagonal -sqrt(omega_x (1 - omega_{x+1}))."""
        return SymmetricTridiagonal(
            diag=np.ones(self.size),
            off=-np.sqrt(self.upper * self.lower),
            half_log_mu=0.5 * self.log_mu,
        )

    def dense(self) -> np.ndarray:
        """Unsymmetrized L(D) as a dense matrix."""
        return np.eye(self.size) + np.diag(self.upper, 1) + np.diag(self.lower, -1)

    def apply(self, f: np.ndarray) -> np.ndarray:
        result = np.array(f, dtype=float)
        if self.size > 1:
            result[:-1] += self.upper * f[1:]
            result[1:] += self.lower * f[:-1]
        return result

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        """(f, g) in L2(mu) on D."""
        return float(np.sum(np.exp(self.log_mu) * f * g))

    def blocks(self) -> Tuple[Tuple[int, int], ...]:
        """(start, stop) index ranges of the maximal intervals making up D."""
        breaks = np.flatnonzero(np.diff(self.sites) != 1) + 1
        starts = np.concatenate(([0], breaks))
        stops = np.concatenate((breaks, [self.size]))
        return tuple((int(a), int(b)) for a, b in zip(starts, stops))
