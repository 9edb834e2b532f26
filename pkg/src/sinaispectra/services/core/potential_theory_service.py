"""Core service for one-dimensional potential theory of the reversible walk.

Follows the Service Layer pattern: one object bound to an environment
exposes equilibrium potentials, capacities, Green functions and exit-time
moments. Every sum of exp(V) is evaluated as a log-sum-exp, so potentials
with variations of several hundred units stay finite.

Sites are lattice sites. With V the potential of the environment:

    cap(p, q)       = 1 / sum_{y=p}^{q-1} exp(V(y))           (p < q)
    h_{a,b}(x)      = sum_{y=x}^{b-1} exp(V(y)) / sum_{y=a}^{b-1} exp(V(y))
    G_D(x, z)       = h_{x,D^c}(z) mu(z) / cap(x, D^c)
"""

import logging
import math
from typing import Iterable, List, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from sinaispectra.domain.constants import SPECTRUM_COLLISION_TOLERANCE, TIE_TOLERANCE
from sinaispectra.domain.environment import (
    Environment,
    lipschitz_constant,
    potential_of,
    reversible_measure,
)
from sinaispectra.domain.exceptions import OverlapError, SpectrumCollisionError, WindowError
from sinaispectra.domain.generator import DirichletGenerator, sturm_counts
from sinaispectra.domain.potential import (
    CapacityValue,
    EquilibriumPotential,
    GreenFunction,
    HittingMoments,
    SandwichCheck,
)

logger = logging.getLogger(__name__)

Sites = Union[int, Iterable[int]]


def _as_set(sites: Sites) -> frozenset:
    if isinstance(sites, (int, np.integer)):
        return frozenset([int(sites)])
    return frozenset(int(x) for x in sites)


class PotentialTheoryService:
    """Core service for equilibrium potentials, capacities and Green functions.

    Boundary sites may range over [x_lo - 1, x_hi + 1]; every site strictly
    between two boundary sites must lie in the environment window.
    """

    def __init__(self, env: Environment):
        """Initialize the potential theory service

        Args:
            env: Environment the walk moves in
        """
        self.env = env
        self.potential = potential_of(env)
        self.measure = reversible_measure(env)
        self.lipschitz = lipschitz_constant(env.kappa)

    # Public API methods

    def equilibrium_two_point(self, a: int, b: int) -> EquilibriumPotential:
        """h_{a,b} on [a, b]: probability to reach a before b.

        Raises:
            ValueError: If a >= b
            WindowError: If [a, b] leaves the admissible range
        """
        if a >= b:
            raise ValueError(f"equilibrium_two_point needs a < b, got a={a}, b={b}")
        self._check_boundary([a, b])
        sites, values = self._two_point_table(a, b)
        return EquilibriumPotential(
            A=frozenset([a]), B=frozenset([b]), lam=0.0, sites=sites, values=values
        )

    def equilibrium_general(self, A: Sites, B: Sites) -> EquilibriumPotential:
        """h_{A,B} pieced together from two-point potentials.

        Between consecutive points of A u B the potential is constant when
        both belong to the same set, and a two-point potential otherwise.
        Outside the hull it equals its value at the nearest point.

        Raises:
            OverlapError: If A and B intersect
        """
        set_a, set_b = self._disjoint(A, B)
        points = sorted(set_a | set_b)
        self._check_boundary(points)
        lo, hi = points[0], points[-1]
        sites = np.arange(lo, hi + 1)
        values = np.zeros(sites.size)
        for p, q in zip(points, points[1:]):
            segment = slice(p - lo, q - lo + 1)
            if (p in set_a) == (q in set_a):
                values[segment] = 1.0 if p in set_a else 0.0
            elif p in set_a:
                values[segment] = self._two_point_table(p, q)[1]
            else:
                values[segment] = 1.0 - self._two_point_table(p, q)[1]
        values[[x - lo for x in set_a]] = 1.0
        values[[x - lo for x in set_b]] = 0.0
        return EquilibriumPotential(A=set_a, B=set_b, lam=0.0, sites=sites, values=values)

    def lambda_equilibrium(self, A: Sites, B: Sites, lam: float) -> EquilibriumPotential:
        """Solution of (L - lambda) h = 0 off A u B with h = 1 on A and 0 on B.

        Written as h^lambda = h + g where g vanishes on A u B and solves
        (L_D - lambda) g = lambda h on the gaps D of the hull.

        Raises:
            OverlapError: If A and B intersect
            SpectrumCollisionError: If lambda is an eigenvalue of L_D
        """
        plain = self.equilibrium_general(A, B)
        if lam == 0.0:
            return plain
        lo, hi = int(plain.sites[0]), int(plain.sites[-1])
        holes = plain.A | plain.B
        if hi - lo < 2 or all(x in holes for x in range(lo + 1, hi)):
            return EquilibriumPotential(
                A=plain.A, B=plain.B, lam=lam, sites=plain.sites, values=plain.values
            )

        gen = DirichletGenerator.build(self.env, (lo + 1, hi - 1), holes=holes)
        self._check_collision(gen, lam)
        interior = gen.sites - lo
        rhs = lam * plain.values[interior]
        ab = np.zeros((3, gen.size))
        ab[1] = 1.0 - lam
        if gen.size > 1:
            ab[0, 1:] = gen.upper
            ab[2, :-1] = gen.lower
        correction = linalg.solve_banded((1, 1), ab, rhs)

        values = plain.values.copy()
        values[interior] += correction
        within = bool(np.all(values >= -1e-12) and np.all(values <= 1.0 + 1e-12))
        if not within:
            logger.debug("lambda=%.3e: equilibrium potential leaves [0, 1]", lam)
        return EquilibriumPotential(
            A=plain.A, B=plain.B, lam=lam, sites=plain.sites, values=values,
            within_unit_interval=within,
        )

    def capacity(self, A: Sites, B: Sites) -> CapacityValue:
        """cap(A, B): sum of cap(p, q) over neighbours p < q of A u B in different sets.

        Raises:
            OverlapError: If A and B intersect
        """
        set_a, set_b = self._disjoint(A, B)
        points = sorted(set_a | set_b)
        self._check_boundary(points)
        terms = [
            self._log_capacity(p, q)
            for p, q in zip(points, points[1:])
            if (p in set_a) != (q in set_a)
        ]
        return CapacityValue.from_log(set_a, set_b, float(logsumexp(terms)))

    def green_function(self, D: Iterable[int]) -> GreenFunction:
        """G_D for a finite domain D inside the environment window.

        Raises:
            WindowError: If D is empty or leaves the window
        """
        sites = np.array(sorted({int(x) for x in D}), dtype=int)
        if sites.size == 0:
            raise WindowError("Green function domain is empty")
        if not (self.env.contains(int(sites[0])) and self.env.contains(int(sites[-1]))):
            raise WindowError(
                f"Domain [{sites[0]}, {sites[-1]}] leaves the window {self.env.window}"
            )

        matrix = np.zeros((sites.size, sites.size))
        breaks = np.flatnonzero(np.diff(sites) != 1) + 1
        for block in np.split(np.arange(sites.size), breaks):
            s, t = int(sites[block[0]]), int(sites[block[-1]])
            matrix[np.ix_(block, block)] = self._block_green(s, t)
        return GreenFunction(sites=sites, matrix=matrix)

    def hitting_moments(self, x: int, a: int, b: int) -> HittingMoments:
        """Mean exit time of (a, b) from x and the conditional means toward a and b.

        Raises:
            ValueError: If x is not strictly between a and b
        """
        if not a < x < b:
            raise ValueError(f"x={x} must lie strictly inside ({a}, {b})")
        self._check_boundary([a, b])
        green = self.green_function(range(a + 1, b))
        row = green.matrix[x - a - 1]
        equilibrium = self.equilibrium_two_point(a, b)
        h = equilibrium.on(green.sites)
        h_x = float(equilibrium.value_at(x))
        return HittingMoments(
            x=x,
            a=a,
            b=b,
            mean_exit=float(row.sum()),
            conditional_mean=float(row @ h) / h_x,
            conditional_mean_b=float(row @ (1.0 - h)) / (1.0 - h_x),
        )

    def conditional_exit_moment(self, x: int, A: Sites, B: Sites) -> float:
        """E_x(tau_A 1{tau_A < tau_B}) for x strictly inside the hull of A u B.

        Raises:
            OverlapError: If x belongs to A u B or A and B intersect
            WindowError: If x lies outside the hull of A u B
        """
        h = self.equilibrium_general(A, B)
        boundary = h.A | h.B
        if x in boundary:
            raise OverlapError(f"Start {x} belongs to A u B")
        if not h.sites[0] < x < h.sites[-1]:
            raise WindowError(f"Start {x} lies outside the hull [{h.sites[0]}, {h.sites[-1]}]")
        left = max(p for p in boundary if p < x)
        right = min(p for p in boundary if p > x)
        green = self.green_function(range(left + 1, right))
        row = green.matrix[x - left - 1]
        return float(row @ h.on(green.sites))

    def renewal_bound_check(self, x: int, A: Sites, B: Sites) -> bool:
        """h_{A,B}(x) <= cap(x, A) / cap(x, B)."""
        set_a, set_b = self._disjoint(A, B)
        if x in set_a or x in set_b:
            raise OverlapError(f"{x} belongs to A u B")
        h = float(self.equilibrium_general(set_a, set_b).value_at(x))
        log_ratio = self.capacity([x], set_a).log_value - self.capacity([x], set_b).log_value
        if h <= 0.0:
            return True
        return math.log(h) <= log_ratio + TIE_TOLERANCE * (1.0 + abs(log_ratio))

    def equilibrium_sandwich(self, x: int, a: int, b: int) -> SandwichCheck:
        """h_{a,b}(x) exp(-[max_{[x,b]} V - max_{[a,b]} V]) against [e^-c/(b-a), e^c (b-x)]."""
        if not a < x < b:
            raise ValueError(f"x={x} must lie strictly inside ({a}, {b})")
        h = float(self.equilibrium_two_point(a, b).value_at(x))
        barrier_x = self._max_between(x, b)
        barrier_a = self._max_between(a, b)
        c = self.lipschitz
        return SandwichCheck(
            name="equilibrium",
            value=h * math.exp(-(barrier_x - barrier_a)),
            lower=math.exp(-c) / (b - a),
            upper=math.exp(c) * (b - x),
            detail=(("x", float(x)), ("a", float(a)), ("b", float(b))),
        )

    def exit_time_sandwich(self, a: int, b: int) -> Tuple[SandwichCheck, SandwichCheck]:
        """Brackets for max_x E_x tau_{a,b} and for the largest conditional mean.

        Both are compared with E = exp(max_y [min(max_{[a,y]} V, max_{[y,b]} V) - V(y)]).

        Returns:
            (mean exit check, conditional mean check)
        """
        if b - a < 2:
            raise ValueError(f"({a}, {b}) has no interior site")
        self._check_boundary([a, b])
        interior = np.arange(a + 1, b)
        values = self.potential.value_at(np.arange(a, b + 1))
        left_max = np.maximum.accumulate(values)
        right_max = np.maximum.accumulate(values[::-1])[::-1]
        inner = slice(1, values.size - 1)
        log_e = float(np.max(np.minimum(left_max[inner], right_max[inner]) - values[inner]))

        green = self.green_function(interior)
        h = self.equilibrium_two_point(a, b).on(interior)
        mean_exit = green.mean_exit_times()
        toward_a = green.matrix @ h / h
        toward_b = green.matrix @ (1.0 - h) / (1.0 - h)

        c, kappa, width = self.lipschitz, self.env.kappa, b - a
        scale = math.exp(log_e)
        mean_check = SandwichCheck(
            name="mean_exit",
            value=float(np.max(mean_exit)),
            lower=math.exp(-c) / 2.0 * scale,
            upper=width ** 3 * math.exp(c) / kappa * scale,
            detail=(("log_E", log_e),),
        )
        conditional_check = SandwichCheck(
            name="conditional_exit",
            value=float(max(np.max(toward_a), np.max(toward_b))),
            lower=math.exp(-c) / 2.0 * scale,
            upper=width ** 4 * math.exp(2.0 * c) / kappa * scale,
            detail=(("log_E", log_e),),
        )
        return mean_check, conditional_check

    @staticmethod
    def barrier_inequality(m1: float, m2: float, m3: float, y_before_x: bool) -> bool:
        """W ^ W~ <= V(z*(y, {a, b})) - V(y), all terms shifted by V(y).

        For a < y <= x: m1 = max_{[a,y]} V, m2 = max_{[y,x]} V, m3 = max_{[x,b]} V.
        For x < y < b:  m1 = max_{[y,b]} V, m2 = max_{[x,y]} V, m3 = max_{[a,x]} V.
        """
        joined = max(m1, m2)
        w = min(joined, m3) + m1 - joined
        if y_before_x:
            w_tilde = w + max(m2, m3) - m3
        else:
            w_tilde = w + m1 - joined
        target = min(m1, max(m2, m3))
        return min(w, w_tilde) <= target + TIE_TOLERANCE * (1.0 + abs(target))

    # Private helpers

    def _two_point_table(self, a: int, b: int) -> Tuple[np.ndarray, np.ndarray]:
        """(sites, h_{a,b}) on [a, b] for a < b."""
        # suffix[k] = log sum_{y=a+k}^{b-1} e^V
        suffix = np.logaddexp.accumulate(self.potential.value_at(np.arange(a, b))[::-1])[::-1]
        return np.arange(a, b + 1), np.append(np.exp(suffix - suffix[0]), 0.0)

    def _log_capacity(self, p: int, q: int) -> float:
        return -float(logsumexp(self.potential.value_at(np.arange(p, q))))

    def _block_green(self, s: int, t: int) -> np.ndarray:
        """G on the interval block [s, t] with boundary s - 1 and t + 1."""
        exponents = self.potential.value_at(np.arange(s - 1, t + 1))
        prefix = np.logaddexp.accumulate(exponents)
        suffix = np.logaddexp.accumulate(exponents[::-1])[::-1]
        size = t - s + 1
        i = np.arange(size)[:, None]
        j = np.arange(size)[None, :]
        # rows are starting points x, columns target sites z
        log_h = np.where(j <= i, prefix[j] - prefix[i], suffix[j + 1] - suffix[i + 1])
        log_cap = np.logaddexp(-prefix[:size], -suffix[1 : size + 1])
        log_mu = self.measure.log_at(np.arange(s, t + 1))
        return np.exp(log_h + log_mu[None, :] - log_cap[:, None])

    def _check_collision(self, gen: DirichletGenerator, lam: float) -> None:
        H = gen.symmetrized()
        spread = SPECTRUM_COLLISION_TOLERANCE * max(abs(lam), np.finfo(float).tiny)
        below, above = sturm_counts(H.diag, H.off, [lam - spread, lam + spread])
        if below != above:
            nearest = linalg.eigvalsh_tridiagonal(
                H.diag, H.off, select="i", select_range=(int(below), int(below))
            )[0]
            raise SpectrumCollisionError(lam, float(nearest))

    def _max_between(self, p: int, q: int) -> float:
        return float(np.max(self.potential.value_at(np.arange(min(p, q), max(p, q) + 1))))

    def _check_boundary(self, points: List[int]) -> None:
        lo, hi = self.env.x_lo - 1, self.env.x_hi + 1
        outside = [p for p in points if not lo <= p <= hi]
        if outside:
            raise WindowError(f"Sites {outside} lie outside [{lo}, {hi}]")

    @staticmethod
    def _disjoint(A: Sites, B: Sites) -> Tuple[frozenset, frozenset]:
        set_a, set_b = _as_set(A), _as_set(B)
        if not set_a or not set_b:
            raise ValueError("A and B must be nonempty")
        common = set_a & set_b
        if common:
            raise OverlapError(f"Sets overlap at {sorted(common)}")
        return set_a, set_b
