"""Core service for Dirichlet spectra and their capacity-based approximations.

Follows the Service Layer pattern. Generators are symmetrized into Jacobi
matrices and diagonalized by bisection on Sturm counts plus inverse
iteration (LAPACK stebz/stein through scipy). The metastability report and
the capacity matrix tie the exact spectrum to equilibrium potentials and
capacities from the potential theory service.
"""

import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, optimize
from scipy.special import logsumexp

from sinaispectra.domain.bounds import KappaConstants
from sinaispectra.domain.constants import (
    BISECTION_ABSTOL,
    COUNT_BOUNDARY_TOLERANCE,
    ROOT_SCAN_FLOOR,
    ROOT_SCAN_POINTS_PER_DECADE,
    ROOT_SCAN_POLE_MARGIN,
    SIGN_CHANGE_FLOOR,
    SOLVER_FLOOR,
    SPECTRUM_COLLISION_TOLERANCE,
)
from sinaispectra.domain.environment import Environment, potential_of, rescale
from sinaispectra.domain.exceptions import RejectedPathError, SpectrumCollisionError, WindowError
from sinaispectra.domain.extrema import GoodPathCertificate
from sinaispectra.domain.generator import DirichletGenerator, SymmetricTridiagonal, sturm_counts
from sinaispectra.domain.spectrum import (
    CapacityMatrix,
    CountResult,
    MetastabilityReport,
    NestingCheck,
    PrincipalPair,
    RootLocation,
    Spectrum,
    StructuralReport,
    as_floats,
)
from sinaispectra.services.core.extrema_service import ExtremaService
from sinaispectra.services.core.potential_theory_service import PotentialTheoryService

logger = logging.getLogger(__name__)


def _log_norm2(log_mu: np.ndarray, values: np.ndarray) -> float:
    """log sum mu f^2 over the nonzero entries of f."""
    nonzero = values != 0.0
    return float(logsumexp(log_mu[nonzero] + 2.0 * np.log(np.abs(values[nonzero]))))


def _mu_distance(log_mu: np.ndarray, f: np.ndarray, g: np.ndarray) -> float:
    return float(math.sqrt(np.sum(np.exp(log_mu) * (f - g) ** 2)))


class _CapacitySystem:
    """Normalized equilibrium potentials h_x / ||h_x|| of the first k labeled minima.

    Holds the lambda-independent parts K and A of the capacity matrix, and
    solves for the lambda-dependent part B on the domain of L_k.
    """

    def __init__(self, env: Environment, N: int, minima: Sequence[int]):
        theory = PotentialTheoryService(env)
        self.points = sorted(int(x) for x in minima)
        targets = set(self.points) | {-N, N}
        self.sites = np.arange(-N + 1, N)
        self.log_mu = theory.measure.log_at(self.sites)
        self.weights = np.exp(self.log_mu)
        k = len(self.points)

        log_norms = np.zeros(k)
        log_caps = np.zeros(k)
        normalized = np.zeros((self.sites.size, k))
        for i, x in enumerate(self.points):
            others = targets - {x}
            values = theory.equilibrium_general([x], others).on(self.sites)
            log_norms[i] = 0.5 * _log_norm2(self.log_mu, values)
            log_caps[i] = theory.capacity([x], others).log_value
            normalized[:, i] = values * np.exp(-log_norms[i])
        self.normalized = normalized

        self.K = np.diag(np.exp(log_caps - 2.0 * log_norms))
        ordered = sorted(targets)
        for p, r in zip(ordered, ordered[1:]):
            if p in self.points and r in self.points:
                i, j = self.points.index(p), self.points.index(r)
                value = -math.exp(theory.capacity([p], [r]).log_value - log_norms[i] - log_norms[j])
                self.K[i, j] = self.K[j, i] = value
        self.A = normalized.T @ (self.weights[:, None] * normalized)
        np.fill_diagonal(self.A, 0.0)

        self.gen = DirichletGenerator.build(env, (-N + 1, N - 1), holes=self.points, N=N)
        self.domain = self.gen.sites - self.sites[0]
        self.symmetric = self.gen.symmetrized()

    @property
    def k(self) -> int:
        return len(self.points)

    def B(self, lam: float) -> np.ndarray:
        """B_xz = (h~_x, lambda (L_k - lambda)^-1 h~_z)_mu."""
        if lam == 0.0:
            return np.zeros((self.k, self.k))
        ab = np.zeros((3, self.gen.size))
        ab[1] = 1.0 - lam
        if self.gen.size > 1:
            ab[0, 1:] = self.gen.upper
            ab[2, :-1] = self.gen.lower
        restricted = self.normalized[self.domain]
        correction = linalg.solve_banded((1, 1), ab, lam * restricted)
        return restricted.T @ (self.weights[self.domain][:, None] * correction)

    def matrix(self, lam: float) -> np.ndarray:
        return self.K - lam * (np.eye(self.k) + self.A) - lam * self.B(lam)

    def determinant(self, lam: float) -> float:
        return float(np.linalg.det(self.matrix(lam)))

    def eigenvalues(self) -> np.ndarray:
        H = self.symmetric
        if H.size == 1:
            return H.diag.copy()
        return linalg.eigvalsh_tridiagonal(
            H.diag, H.off, lapack_driver="stebz", tol=BISECTION_ABSTOL
        )


class SpectralService:
    """Core service for Dirichlet spectra and metastability checks.

    Stateless apart from the injected extrema service and the solver floor.
    """

    def __init__(
        self,
        extrema_service: Optional[ExtremaService] = None,
        solver_floor: float = SOLVER_FLOOR,
    ):
        """Initialize the spectral service

        Args:
            extrema_service: Service used to certify good paths
            solver_floor: Smallest predicted eigenvalue treated as resolvable
        """
        self.extrema_service = extrema_service or ExtremaService()
        self.solver_floor = solver_floor

    # Public API methods

    def build_generator(
        self,
        env: Environment,
        interval: Tuple[int, int],
        holes: Optional[Iterable[int]] = None,
        N: int = 1,
    ) -> DirichletGenerator:
        return DirichletGenerator.build(env, interval, holes=holes, N=N)

    def symmetrize(self, gen: DirichletGenerator) -> SymmetricTridiagonal:
        return gen.symmetrized()

    def full_spectrum(
        self, gen: DirichletGenerator, anchors: Sequence[int] = ()
    ) -> Spectrum:
        """All eigenpairs of L(D), eigenvectors mu-orthonormal.

        Eigenvector j < len(anchors) is signed so that (psi_j, 1_{anchors[j]})_mu > 0,
        the others so that their largest component is positive.

        Raises:
            WindowError: If an anchor is not a site of D
        """
        H = gen.symmetrized()
        if H.size == 1:
            values, vectors = H.diag.copy(), np.ones((1, 1))
        else:
            values, vectors = linalg.eigh_tridiagonal(
                H.diag, H.off, lapack_driver="stebz", tol=BISECTION_ABSTOL
            )
        pivots = np.argmax(np.abs(vectors), axis=0)
        for j, x in zip(range(H.size), anchors):
            pivots[j] = gen.index_of(int(x))
        signs = np.sign(vectors[pivots, np.arange(H.size)])
        vectors = vectors * np.where(signs == 0, 1.0, signs)
        residuals = np.linalg.norm(H.matvec(vectors) - vectors * values, axis=0)

        if H.size > 1 and np.any(np.diff(values) <= 0):
            logger.warning("Eigenvalues of a %d-site domain are not resolved as simple", H.size)
        logger.debug("Spectrum of %d sites: lambda_1=%.3e", H.size, values[0])
        return Spectrum(
            sites=gen.sites,
            eigenvalues=values,
            eigenvectors=H.from_symmetric(vectors),
            residuals=residuals,
            log_mu=gen.log_mu,
        )

    def dense_spectrum(self, gen: DirichletGenerator) -> np.ndarray:
        """Eigenvalues of the unsymmetrized L(D) from a dense general eigensolver."""
        values = np.linalg.eigvals(gen.dense())
        return np.sort(values.real)

    def count_below(self, gen: DirichletGenerator, lam: float) -> CountResult:
        H = gen.symmetrized()
        below, count, above = sturm_counts(
            H.diag, H.off, [lam - COUNT_BOUNDARY_TOLERANCE, lam, lam + COUNT_BOUNDARY_TOLERANCE]
        )
        return CountResult(lam=lam, count=int(count), on_boundary=bool(below != above))

    def principal_pair(self, gen: DirichletGenerator) -> PrincipalPair:
        """Smallest eigenvalue of L(D) with its positive mu-normalized eigenvector."""
        H = gen.symmetrized()
        if H.size == 1:
            value, vector = float(H.diag[0]), np.ones(1)
        else:
            values, vectors = linalg.eigh_tridiagonal(
                H.diag, H.off, select="i", select_range=(0, 0),
                lapack_driver="stebz", tol=BISECTION_ABSTOL,
            )
            value, vector = float(values[0]), vectors[:, 0]
        vector = vector * np.sign(vector[np.argmax(np.abs(vector))])
        return PrincipalPair(lam=value, sites=gen.sites, vector=H.from_symmetric(vector))

    def rayleigh_quotient(self, gen: DirichletGenerator, f: np.ndarray) -> float:
        """(f, L f)_mu / (f, f)_mu for f on the sites of D."""
        return gen.inner(f, gen.apply(f)) / gen.inner(f, f)

    def metastability_report(
        self, env: Environment, N: int, h: float, delta: float
    ) -> MetastabilityReport:
        """Exact small eigenvalues of L(I_N) against capacity predictions.

        I_N = {-N+1, ..., N-1}; the labeled minima x_1..x_q come from the
        good-path certificate of V_N on [-1, 1], and S*_k = {x_1..x_k, -N, N}.

        Raises:
            RejectedPathError: If V_N is not a good path for (h, delta)
            WindowError: If the environment does not cover [-N, N]
        """
        certificate, minima = self._certified_minima(env, N, h, delta)
        q = len(minima)
        theory = PotentialTheoryService(env)
        constants = KappaConstants.for_kappa(env.kappa)
        boundary = {-N, N}

        gen = self.build_generator(env, (-N + 1, N - 1), N=N)
        spectrum = self.full_spectrum(gen, anchors=minima)
        log_mu = spectrum.log_mu

        predictions, normalized = [], []
        for k, x in enumerate(minima, start=1):
            targets = set(minima[: k - 1]) | boundary
            values = theory.equilibrium_general([x], targets).on(gen.sites)
            log_norm2 = _log_norm2(log_mu, values)
            log_cap = theory.capacity([x], targets).log_value
            predictions.append(math.exp(log_cap - log_norm2))
            normalized.append(values * math.exp(-0.5 * log_norm2))

        nested = [
            self.principal_pair(self.build_generator(env, (-N + 1, N - 1), minima[:k], N))
            for k in range(q + 1)
        ]
        lambda_bar = [pair.lam for pair in nested]
        lambda_star = lambda_bar[q]
        count = self.count_below(gen, lambda_star)

        exact = spectrum.eigenvalues[:q]
        next_eigenvalue = float(spectrum.eigenvalues[q]) if spectrum.size > q else math.inf
        rel_err = [abs(lam / pred - 1.0) for lam, pred in zip(exact, predictions)]
        vec_dist = [
            _mu_distance(log_mu, spectrum.vector(k), normalized[k]) for k in range(q)
        ]

        depths = certificate.depths
        lower = [constants.lower(N, d) for d in depths]
        upper = [constants.upper(N, d) for d in depths]
        brackets_ok = all(lo <= lam <= up for lo, lam, up in zip(lower, exact, upper))
        nested_ok = all(
            constants.lower(N, depths[k]) <= lambda_bar[k] <= constants.upper(N, depths[k])
            for k in range(q)
        )
        following = list(exact[1:]) + [next_eigenvalue]
        ratios = [lam / nxt for lam, nxt in zip(exact, following)]
        splitting_bound = constants.splitting_bound(N, delta)

        gaps, rate_gaps_ok, eigen_dist, inflation = [], True, [], []
        for k, x in enumerate(minima, start=1):
            previous, current = lambda_bar[k - 1], lambda_bar[k]
            gap = abs(previous - predictions[k - 1])
            gaps.append(gap)
            rate_gaps_ok = rate_gaps_ok and gap <= previous ** 2 / (current - previous)
            targets = set(minima[: k - 1]) | boundary
            tilted = theory.lambda_equilibrium([x], targets, previous)
            domain_sites = nested[k - 1].sites
            tilted_values = tilted.on(domain_sites)
            domain_log_mu = theory.measure.log_at(domain_sites)
            log_norm2 = _log_norm2(domain_log_mu, tilted_values)
            tilted_values = tilted_values * math.exp(-0.5 * log_norm2)
            eigen_dist.append(_mu_distance(domain_log_mu, nested[k - 1].vector, tilted_values))
            plain = theory.equilibrium_general([x], targets).on(domain_sites)
            positive = plain > 0
            inflation.append(float(np.max(tilted.on(domain_sites)[positive] / plain[positive])))

        status = "ok" if min(predictions) >= self.solver_floor else "unresolvable"
        if status != "ok":
            logger.warning(
                "N=%d: predicted lambda_q=%.3e is below the solver floor", N, min(predictions)
            )
        logger.debug("N=%d, q=%d: count below lambda*=%d", N, q, count.count)
        return MetastabilityReport(
            N=N,
            h=h,
            delta=delta,
            certificate=certificate,
            minima_sites=tuple(minima),
            lambda_exact=as_floats(exact),
            lambda_pred=as_floats(predictions),
            rel_err=as_floats(rel_err),
            vec_dist=as_floats(vec_dist),
            lambda_bar=as_floats(lambda_bar),
            lambda_star=lambda_star,
            count_below_star=count.count,
            next_eigenvalue=next_eigenvalue,
            bracket_lower=as_floats(lower),
            bracket_upper=as_floats(upper),
            brackets_ok=brackets_ok,
            splitting_ratios=as_floats(ratios),
            splitting_bound=splitting_bound,
            splitting_ok=all(r <= splitting_bound for r in ratios),
            nested_brackets_ok=nested_ok,
            rate_gaps=as_floats(gaps),
            rate_gaps_ok=rate_gaps_ok,
            rate_eigenfunction_distance=as_floats(eigen_dist),
            inflation=as_floats(inflation),
            correction_bound=math.exp(-delta * math.sqrt(N) / 10.0),
            residuals=as_floats(spectrum.residuals[: q + 1]),
            constants=constants.to_dict(),
            status=status,
        )

    def capacity_matrix(
        self, env: Environment, N: int, h: float, delta: float, k: int, lam: float
    ) -> CapacityMatrix:
        """Normalized capacity matrix of the first k labeled minima at lambda.

        Raises:
            RejectedPathError: If V_N is not a good path for (h, delta)
            SpectrumCollisionError: If lambda is an eigenvalue of L_k
        """
        system, minima = self._capacity_system(env, N, h, delta, k)
        eigenvalues = system.eigenvalues()
        distance = float(np.min(np.abs(eigenvalues - lam)))
        if distance <= SPECTRUM_COLLISION_TOLERANCE * max(abs(lam), np.finfo(float).tiny):
            nearest = float(eigenvalues[np.argmin(np.abs(eigenvalues - lam))])
            raise SpectrumCollisionError(lam, nearest)

        B = system.B(lam)
        previous = self.principal_pair(
            self.build_generator(env, (-N + 1, N - 1), minima[: k - 1], N)
        ).lam
        deepest = system.points.index(minima[k - 1])
        b_bound = abs(lam) / distance
        checks = {
            "B_max": float(np.max(np.abs(B))),
            "B_bound": b_bound,
            "B_ok": bool(np.max(np.abs(B)) <= b_bound * (1.0 + 1e-9)),
            "A_max": float(np.max(np.abs(system.A))) if k > 1 else 0.0,
            "K_symmetric": bool(np.allclose(system.K, system.K.T, rtol=1e-12, atol=0.0)),
            "diagonal_ratio_error": abs(system.K[deepest, deepest] / previous - 1.0),
            "spectral_distance": distance,
        }
        return CapacityMatrix(
            k=k, lam=lam, sites=tuple(system.points), K=system.K, A=system.A, B=B, checks=checks
        )

    def determinant_root_locate(
        self, env: Environment, N: int, h: float, delta: float, k: int
    ) -> RootLocation:
        """Zeros of det E^_k on (0, lambda-bar_k) against the first k eigenvalues of L(I_N).

        Scans a log-spaced grid for sign changes of the determinant and
        refines each bracket with Brent's method. No pole of E^_k lies
        below lambda-bar_k, the principal eigenvalue of L_k.
        """
        system, _ = self._capacity_system(env, N, h, delta, k)
        top = float(system.eigenvalues()[0]) * (1.0 - ROOT_SCAN_POLE_MARGIN)
        gen = self.build_generator(env, (-N + 1, N - 1), N=N)
        H = gen.symmetrized()
        exact = linalg.eigvalsh_tridiagonal(
            H.diag, H.off, select="i", select_range=(0, k - 1),
            lapack_driver="stebz", tol=BISECTION_ABSTOL,
        )

        roots: List[float] = []
        density = ROOT_SCAN_POINTS_PER_DECADE
        for _ in range(3):
            roots = self._scan_roots(system, top, density)
            if len(roots) >= k:
                break
            density *= 4
            logger.warning("k=%d: found %d roots, rescanning at %d points per decade",
                           k, len(roots), density)

        reason = None
        if exact[0] < ROOT_SCAN_FLOOR:
            reason = "below_scan_floor"
        elif len(roots) < k:
            reason = "missing_roots"
        elif len(roots) > k:
            reason = "excess_roots"
        matched = roots[:k]
        rel_errors = [abs(r / lam - 1.0) for r, lam in zip(matched, exact)]
        return RootLocation(
            k=k,
            roots=as_floats(roots),
            eigenvalues=as_floats(exact),
            rel_errors=as_floats(rel_errors),
            scan_upper=top,
            flagged=reason is not None,
            reason=reason,
        )

    def structural_checks(self, spectrum: Spectrum, gen: DirichletGenerator) -> StructuralReport:
        """Oscillation counts and parity symmetry of an interval spectrum."""
        if not gen.is_interval:
            return StructuralReport(
                interval=False,
                notices=("domain has holes: oscillation and parity checks skipped",),
            )
        n = spectrum.size
        symmetric = np.column_stack([spectrum.symmetric_vector(i) for i in range(n)])
        sign_changes = tuple(self._sign_changes(symmetric[:, i]) for i in range(n))
        values = spectrum.eigenvalues
        parity_residual = float(np.max(np.abs(values + values[::-1] - 2.0)))
        flip = np.where(spectrum.sites % 2 == 0, 1.0, -1.0)
        overlaps = np.abs(np.sum((flip[:, None] * symmetric) * symmetric[:, ::-1], axis=0))
        return StructuralReport(
            interval=True,
            sign_changes=sign_changes,
            parity_residual=parity_residual,
            pairing_residual=float(np.max(1.0 - overlaps)),
        )

    def nesting_check(
        self, env: Environment, interval: Tuple[int, int], holes: Iterable[int]
    ) -> NestingCheck:
        """Punching `holes` into an interval raises the principal eigenvalue,
        and L(interval) has at most |holes| eigenvalues up to the new one."""
        removed = sorted({int(x) for x in holes})
        outer_gen = self.build_generator(env, interval)
        outer = self.principal_pair(outer_gen).lam
        inner = self.principal_pair(self.build_generator(env, interval, removed)).lam
        H = outer_gen.symmetrized()
        count = int(sturm_counts(H.diag, H.off, [inner * (1.0 + 1e-12)])[0])
        return NestingCheck(outer=outer, inner=inner, removed=len(removed), count=count)

    # Private helpers

    def _certified_minima(
        self, env: Environment, N: int, h: float, delta: float
    ) -> Tuple[GoodPathCertificate, List[int]]:
        if not (env.x_lo <= -N + 1 and env.x_hi >= N):
            raise WindowError(f"Environment window {env.window} does not cover [-{N}, {N}]")
        path = rescale(potential_of(env), N).to_path()
        certificate = self.extrema_service.good_path_certificate(path, h, delta)
        if not certificate.accepted:
            raise RejectedPathError(certificate.reason or "rejected")
        return certificate, [int(round(t * N)) for t in certificate.labeling]

    def _capacity_system(
        self, env: Environment, N: int, h: float, delta: float, k: int
    ) -> Tuple[_CapacitySystem, List[int]]:
        _, minima = self._certified_minima(env, N, h, delta)
        if not 1 <= k <= len(minima):
            raise ValueError(f"k must lie in [1, {len(minima)}], got {k}")
        return _CapacitySystem(env, N, minima[:k]), minima

    @staticmethod
    def _scan_roots(system: _CapacitySystem, top: float, density: int) -> List[float]:
        decades = math.log10(top / ROOT_SCAN_FLOOR)
        grid = np.logspace(math.log10(ROOT_SCAN_FLOOR), math.log10(top),
                           max(2, int(math.ceil(decades * density)) + 1))
        dets = np.array([system.determinant(lam) for lam in grid])
        roots = []
        for i in np.flatnonzero(np.sign(dets[:-1]) * np.sign(dets[1:]) < 0):
            roots.append(
                optimize.brentq(system.determinant, grid[i], grid[i + 1],
                                xtol=ROOT_SCAN_FLOOR * 1e-6, rtol=1e-14)
            )
        return roots

    @staticmethod
    def _sign_changes(vector: np.ndarray) -> int:
        kept = vector[np.abs(vector) >= SIGN_CHANGE_FLOOR * np.max(np.abs(vector))]
        signs = np.where(kept >= 0, 1, -1)
        return int(np.count_nonzero(np.diff(signs)))
