"""Core service for Sinai's walk: simulation, origin valleys, localization and relaxation.

Follows the Service Layer pattern. Long-time laws of the walk killed outside
a box A are evaluated exactly from the spectrum of L(A):

    (1/mu(0)) (1_0, P(A)^T 1_Y) = sum_j (1 - lambda_j)^T (psi_j, 1_Y) psi_j(0),

with P(A) = I - L(A). Powers are taken in log-magnitude form with an explicit
sign, so T may be astronomically large.
"""

import logging
import math
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from sinaispectra.domain.constants import (
    DEFAULT_SCREEN_BETA,
    DEFAULT_SCREEN_DELTA,
    DEFAULT_SCREEN_DELTA_PRIME,
    DEFAULT_WINDOW_CONSTANT,
    SPECTRAL_SIZE_CAP,
)
from sinaispectra.domain.environment import (
    DisorderLaw,
    Environment,
    potential_of,
    sample_environment,
)
from sinaispectra.domain.exceptions import DegenerateError, WindowError, WindowExitError
from sinaispectra.domain.path import Path
from sinaispectra.domain.spectrum import Spectrum
from sinaispectra.domain.walk import (
    AnnealedReport,
    ExitProbability,
    HittingEstimate,
    LocalizationReport,
    OriginValley,
    RelaxationCurve,
    RelaxationReport,
    Screening,
    Trajectory,
    ValleyIdentities,
    ValleyTriple,
    annealed_cdf,
)
from sinaispectra.services.core.extrema_service import ExtremaService
from sinaispectra.services.core.potential_theory_service import PotentialTheoryService
from sinaispectra.services.core.spectral_service import SpectralService

logger = logging.getLogger(__name__)

Window = Callable[[float], float]

# Longest horizon for which the propagator is cross-checked by direct powering
POWERING_LIMIT = 1_000


def identity_window(x: float) -> float:
    return x


class WalkService:
    """Core service for walk trajectories and valley-scale spectral propagators."""

    def __init__(
        self,
        spectral_service: Optional[SpectralService] = None,
        extrema_service: Optional[ExtremaService] = None,
        rho: Window = identity_window,
        window_constant: float = DEFAULT_WINDOW_CONSTANT,
    ):
        """Initialize the walk service

        Args:
            spectral_service: Service providing Dirichlet spectra
            extrema_service: Service extracting h-extrema of potentials
            rho: Window function in delta_n = rho(C1 ln ln n / ln n)
            window_constant: The constant C1
        """
        self.extrema_service = extrema_service or ExtremaService()
        self.spectral_service = spectral_service or SpectralService(self.extrema_service)
        self.rho = rho
        self.window_constant = window_constant

    # Public API methods

    def simulate(
        self,
        env: Environment,
        start: int,
        steps: int,
        seed: int,
        sets: Optional[Dict[str, Iterable[int]]] = None,
        record: bool = False,
    ) -> Trajectory:
        """Run the chain X_{k+1} = X_k + 1 with probability omega_{X_k}, else X_k - 1.

        Raises:
            WindowExitError: If the walk leaves the environment window
        """
        if not env.contains(start):
            raise WindowError(f"Start {start} is outside the window {env.window}")
        rng = np.random.default_rng(seed)
        uniforms = rng.random(steps)
        lookups = {name: frozenset(int(x) for x in sites) for name, sites in (sets or {}).items()}
        occupation = {name: int(start in members) for name, members in lookups.items()}
        positions = np.empty(steps + 1, dtype=np.int64) if record else None
        if positions is not None:
            positions[0] = start

        x = start
        for time in range(steps):
            x += 1 if uniforms[time] < env.omega[x - env.x_lo] else -1
            if not env.contains(x):
                raise WindowExitError(time + 1, x)
            for name, members in lookups.items():
                if x in members:
                    occupation[name] += 1
            if positions is not None:
                positions[time + 1] = x
        return Trajectory(
            start=start, steps=steps, endpoint=x, occupation=occupation,
            positions=positions, seed=seed,
        )

    def mc_hitting(
        self, env: Environment, x: int, A: Iterable[int], B: Iterable[int], trials: int, seed: int
    ) -> HittingEstimate:
        """Monte Carlo estimates of P_x(tau_A < tau_B), E_x tau_{A u B} and conditional means.

        Raises:
            ValueError: If x lies outside the hull of A u B
            WindowError: If the hull interior leaves the environment window
        """
        set_a, set_b = frozenset(int(p) for p in A), frozenset(int(p) for p in B)
        points = sorted(set_a | set_b)
        if not points or not points[0] <= x <= points[-1]:
            raise ValueError(f"Start {x} must lie in the hull of A u B")
        if points[-1] - points[0] > 1 and not (
            env.contains(points[0] + 1) and env.contains(points[-1] - 1)
        ):
            raise WindowError(f"Hull [{points[0]}, {points[-1]}] leaves the window {env.window}")

        offset = points[0]
        absorbing = np.zeros(points[-1] - offset + 1, dtype=bool)
        in_a = np.zeros_like(absorbing)
        absorbing[[p - offset for p in points]] = True
        in_a[[p - offset for p in set_a]] = True

        rng = np.random.default_rng(seed)
        position = np.full(trials, x, dtype=np.int64)
        time = np.zeros(trials, dtype=np.int64)
        active = np.flatnonzero(~absorbing[position - offset])
        while active.size:
            omega = env.omega[position[active] - env.x_lo]
            position[active] += np.where(rng.random(active.size) < omega, 1, -1)
            time[active] += 1
            active = active[~absorbing[position[active] - offset]]

        hit_a = in_a[position - offset]
        p = float(np.mean(hit_a))
        return HittingEstimate(
            x=x,
            trials=trials,
            probability=p,
            probability_se=math.sqrt(p * (1.0 - p) / trials),
            mean_exit=float(np.mean(time)),
            mean_exit_se=self._standard_error(time),
            conditional_mean=float(np.mean(time[hit_a])) if hit_a.any() else math.nan,
            conditional_mean_se=self._standard_error(time[hit_a]),
            conditional_mean_b=float(np.mean(time[~hit_a])) if (~hit_a).any() else math.nan,
            conditional_mean_b_se=self._standard_error(time[~hit_a]),
        )

    def valley_covering_origin(self, path: Path, h: float) -> ValleyTriple:
        """(m1, m, m2): nearest h-maxima m1 < 0 <= m2 and the h-minimum between them.

        Raises:
            WindowError: If no h-maximum lies on one side of the origin
            DegenerateError: If (m1, m2) does not hold exactly one h-minimum
        """
        extrema = self.extrema_service.extract_extrema(path, h)
        left = [t for t in extrema.maxima if t < 0]
        right = [t for t in extrema.maxima if t >= 0]
        if not left or not right:
            raise WindowError(
                f"No {h:g}-maximum on both sides of the origin in [{path.start:g}, {path.end:g}]"
            )
        m1, m2 = max(left), min(right)
        bottoms = [t for t in extrema.minima if m1 < t < m2]
        if len(bottoms) != 1:
            raise DegenerateError(f"{len(bottoms)} h-minima between {m1:g} and {m2:g}")
        return ValleyTriple(left=m1, bottom=bottoms[0], right=m2)

    def origin_valley(self, env: Environment, n: float) -> OriginValley:
        """The ln n-valley of V covering the origin.

        Raises:
            ValueError: If n <= 1
            WindowError: If a flanking barrier is missing or only qualifies
                through the window boundary
        """
        if n <= 1:
            raise ValueError(f"n must exceed 1, got {n}")
        return self._valley_at(env, math.log(n))

    def screening(
        self,
        env: Environment,
        valley: OriginValley,
        delta: float = DEFAULT_SCREEN_DELTA,
        delta_prime: float = DEFAULT_SCREEN_DELTA_PRIME,
        beta: float = DEFAULT_SCREEN_BETA,
    ) -> Screening:
        """Geometric screen of the valley on the rescaled potential.

        With gamma(x) = V(x ln^2 n) / ln n, window W = [-1/delta', 1/delta']
        and (m1, m, m2) the valley triple of gamma:
            valley_in_window       -m1, m2 <= 1/delta'
            neighbour_minima       1-minima of gamma in W on both sides of m
            stable_minima          (1 - delta)- and (1 + delta)-minima agree on W
            origin_below_barriers  gamma(m1) ^ gamma(m2) >= max of gamma between 0 and m, + delta
            bottom_bounded         gamma(m) >= -1/delta
            bottom_below_barriers  gamma(m1) ^ gamma(m2) >= max of gamma on |x - m| <= beta, + delta

        Raises:
            WindowError: If the environment does not cover W
        """
        potential = potential_of(env)
        scale, h = valley.scale, valley.h
        reach = int(math.ceil(scale / delta_prime))
        if not (potential.contains(-reach) and potential.contains(reach)):
            raise WindowError(
                f"Screening window [-{reach}, {reach}] exceeds the potential window "
                f"[{potential.x_lo}, {potential.x_hi}]"
            )
        path = potential.to_path()

        def minima(height: float) -> List[int]:
            found = self.extrema_service.extract_extrema(path, height).minima
            return [int(round(t)) for t in found if -reach <= t <= reach]

        level = lambda x: float(potential.value_at(x))  # noqa: E731
        barrier = min(level(valley.a), level(valley.b))
        unit = minima(h)
        lo, hi = sorted((0, valley.m))
        near_lo = max(valley.m - int(math.floor(beta * scale)), potential.x_lo)
        near_hi = min(valley.m + int(math.floor(beta * scale)), potential.x_hi)
        conditions = {
            "valley_in_window": max(-valley.a, valley.b) <= scale / delta_prime,
            "neighbour_minima": any(x < valley.m for x in unit) and any(x > valley.m for x in unit),
            "stable_minima": minima((1.0 - delta) * h) == minima((1.0 + delta) * h),
            "origin_below_barriers": barrier >= float(np.max(potential.value_at(
                np.arange(lo, hi + 1)))) + delta * h,
            "bottom_bounded": level(valley.m) >= -h / delta,
            "bottom_below_barriers": barrier >= float(np.max(potential.value_at(
                np.arange(near_lo, near_hi + 1)))) + delta * h,
        }
        result = Screening(conditions=conditions, delta=delta, delta_prime=delta_prime, beta=beta)
        logger.debug("Screening at ln n=%.3f: %s", h, result.failures or "passed")
        return result

    def propagator(
        self,
        env: Environment,
        box: Tuple[int, int],
        target: Tuple[int, int],
        steps: Sequence[int],
        start: int = 0,
        spectrum: Optional[Spectrum] = None,
    ) -> np.ndarray:
        """P_start(X_T in target, X_k in box for all k <= T) for each T in `steps`."""
        spectrum = spectrum or self.spectral_service.full_spectrum(
            self.spectral_service.build_generator(env, box)
        )
        weights = self._weights(spectrum, target, start)
        return np.array([float(self._powers(spectrum.eigenvalues, T) @ weights) for T in steps])

    def powering_check(
        self, env: Environment, box: Tuple[int, int], target: Tuple[int, int], steps: int,
        start: int = 0,
    ) -> float:
        """Largest gap between the spectral propagator and direct powering of P(A) up to `steps`.

        Raises:
            ValueError: If steps exceeds POWERING_LIMIT
        """
        if steps > POWERING_LIMIT:
            raise ValueError(f"Direct powering is limited to {POWERING_LIMIT} steps")
        gen = self.spectral_service.build_generator(env, box)
        spectral = self.propagator(env, box, target, range(steps + 1), start=start)
        indicator = self._indicator(gen.sites, target)
        origin = gen.index_of(start)
        direct = [indicator[origin]]
        vector = indicator
        for _ in range(steps):
            vector = vector - gen.apply(vector)
            direct.append(vector[origin])
        return float(np.max(np.abs(spectral - np.array(direct))))

    def localization_report(
        self,
        env: Environment,
        n: float,
        mc_trials: int = 0,
        seed: int = 0,
        delta: float = DEFAULT_SCREEN_DELTA,
        delta_prime: float = DEFAULT_SCREEN_DELTA_PRIME,
        beta: float = DEFAULT_SCREEN_BETA,
    ) -> LocalizationReport:
        """Exact lower bound and Monte Carlo estimate of P_0(X_n in D_n).

        The spectral bound keeps only paths that never leave A_n; boxes
        larger than SPECTRAL_SIZE_CAP are reported from Monte Carlo only.
        """
        valley = self.origin_valley(env, n)
        screen = self.screening(env, valley, delta, delta_prime, beta)
        steps = int(math.floor(n))

        spectral_lower = initial = None
        identities = None
        flagged = None
        if valley.box_size > SPECTRAL_SIZE_CAP:
            flagged = "spectral_size_cap"
            logger.warning("Box of %d sites exceeds the spectral cap", valley.box_size)
        elif not valley.box[0] <= 0 <= valley.box[1]:
            flagged = "origin_on_barrier"
        else:
            spectrum = self.spectral_service.full_spectrum(
                self.spectral_service.build_generator(env, valley.box)
            )
            at_zero, at_n = self.propagator(
                env, valley.box, valley.target, [0, steps], spectrum=spectrum
            )
            lo, hi = valley.target
            initial = abs(at_zero - float(lo <= 0 <= hi))
            spectral_lower = float(at_n)
            identities = self.valley_identities(env, valley)

        mc_estimate = mc_se = None
        if mc_trials > 0:
            mc_estimate, mc_se = self._mc_in_target(env, valley.target, steps, mc_trials, seed)

        return LocalizationReport(
            valley=valley,
            screening=screen,
            spectral_lower=spectral_lower,
            mc_estimate=mc_estimate,
            mc_se=mc_se,
            mc_trials=mc_trials,
            initial_residual=initial,
            identities=identities,
            flagged=flagged,
        )

    def exit_probability(
        self, env: Environment, box: Tuple[int, int], steps: int, start: int = 0
    ) -> ExitProbability:
        """P_start(tau_{A^c} >= T) = (1/mu(0)) (1_0, P(A)^(T-1) 1_A)."""
        if steps < 1:
            raise ValueError(f"steps must be positive, got {steps}")
        spectrum = self.spectral_service.full_spectrum(
            self.spectral_service.build_generator(env, box)
        )
        survival = self.propagator(env, box, box, [steps - 1], start=start, spectrum=spectrum)[0]
        return ExitProbability(
            steps=steps,
            survival=float(np.clip(survival, 0.0, 1.0)),
            principal=float(spectrum.eigenvalues[0]),
        )

    def valley_identities(self, env: Environment, valley: OriginValley) -> ValleyIdentities:
        """Deviations of h = h_{m, A^c} from 1 at the origin and in mu-mass on D_n."""
        theory = PotentialTheoryService(env)
        equilibrium = theory.equilibrium_general([valley.m], [valley.a, valley.b])
        lo, hi = valley.box
        sites = np.arange(lo, hi + 1)
        h = equilibrium.on(sites)
        log_mu = theory.measure.log_at(sites)
        shift = float(np.max(log_mu))
        weights = np.exp(log_mu - shift)
        in_target = (sites >= valley.target[0]) & (sites <= valley.target[1])

        norm_h2 = float(np.sum(weights * h * h))
        overlap = float(np.sum(weights[in_target] * h[in_target]))
        target_norm = math.sqrt(float(np.sum(weights[in_target])))
        return ValleyIdentities(
            origin=abs(float(equilibrium.value_at(0)) - 1.0),
            overlap=abs(overlap / norm_h2 - 1.0),
            norm_ratio=abs(target_norm / math.sqrt(norm_h2) - 1.0),
        )

    def relaxation(
        self,
        env: Environment,
        n0: float,
        t_grid: Sequence[float],
        max_boxes: int = 3,
        growth: float = 0.02,
        delta: float = DEFAULT_SCREEN_DELTA,
    ) -> RelaxationReport:
        """Relaxation curves of the boxes A_{n_k}.

        Starting from n0, ln n grows by the factor (1 + growth) until the
        valley bottom changes; each change opens box k. For every box past
        the first, Lambda_k = lambda_2 of L(A_{n_k}) and the curve is the
        exact propagator at T = floor(t / Lambda_k).
        """
        boxes = [self.origin_valley(env, n0)]
        flagged = None
        log_n = boxes[0].h
        while len(boxes) < max_boxes + 1:
            log_n *= 1.0 + growth
            try:
                candidate = self._valley_at(env, log_n)
            except (WindowError, DegenerateError) as error:
                flagged = f"box_{len(boxes)}: {error}"
                break
            if candidate.m != boxes[-1].m:
                boxes.append(candidate)

        if len(boxes) < 2:
            flagged = flagged or "fewer_than_two_boxes"

        grid = np.asarray(t_grid, dtype=float)
        curves = []
        for k, valley in enumerate(boxes[1:], start=1):
            curves.append(self._relaxation_curve(env, k, valley, grid, delta))
            logger.debug("Box %d: Lambda=%.3e over %d sites", k, curves[-1].rate, valley.box_size)
        return RelaxationReport(curves=tuple(curves), boxes=tuple(boxes), flagged=flagged)

    def annealed_limit_check(
        self,
        law: DisorderLaw,
        n: float,
        envs: int,
        seed: int = 0,
        window_factor: float = 10.0,
        level: float = 1e-3,
    ) -> AnnealedReport:
        """KS test of sigma^2 m^(n) / ln^2 n over environments against the limit law.

        Each environment covers window_factor ln^2 n / sigma^2 sites on both
        sides; the window doubles (twice at most) when the valley does not fit.
        """
        sigma2 = law.sigma2
        scale = math.log(n) ** 2
        samples, skipped = [], 0
        children = np.random.SeedSequence(seed).generate_state(envs)
        for child in children:
            reach = int(math.ceil(window_factor * scale / sigma2))
            for _ in range(3):
                env = sample_environment(law, (-reach, reach), int(child))
                try:
                    valley = self.origin_valley(env, n)
                except (WindowError, DegenerateError):
                    reach *= 2
                    continue
                samples.append(sigma2 * valley.rescaled_bottom)
                break
            else:
                skipped += 1

        values = np.array(samples)
        result = stats.kstest(values, annealed_cdf)
        if skipped:
            logger.warning("%d of %d environments had no resolvable valley", skipped, envs)
        return AnnealedReport(
            n=n,
            samples=values,
            skipped=skipped,
            ks_statistic=float(result.statistic),
            ks_pvalue=float(result.pvalue),
            level=level,
        )

    # Private helpers

    def _valley_at(self, env: Environment, h: float) -> OriginValley:
        potential = potential_of(env)
        path = potential.to_path()
        extrema = self.extrema_service.extract_extrema(path, h)
        triple = self.valley_covering_origin(path, h)
        if extrema.left_boundary_max and triple.left == extrema.maxima[0]:
            raise WindowError(f"Left barrier at {triple.left:g} sits on the window boundary")
        if extrema.right_boundary_max and triple.right == extrema.maxima[-1]:
            raise WindowError(f"Right barrier at {triple.right:g} sits on the window boundary")

        a, m, b = int(round(triple.left)), int(round(triple.bottom)), int(round(triple.right))
        bottom = float(potential.value_at(m))
        ratio = math.log(h) / h if h > 1.0 else 0.0
        return OriginValley(
            n=math.exp(h),
            h=h,
            a=a,
            m=m,
            b=b,
            depths=(float(potential.value_at(a)) - bottom, float(potential.value_at(b)) - bottom),
            delta_n=self.rho(self.window_constant * ratio) if ratio > 0 else 0.0,
        )

    def _relaxation_curve(
        self, env: Environment, k: int, valley: OriginValley, t_grid: np.ndarray, delta: float
    ) -> RelaxationCurve:
        spectrum = self.spectral_service.full_spectrum(
            self.spectral_service.build_generator(env, valley.box)
        )
        if spectrum.size < 2:
            raise DegenerateError(f"Box {k} has a single site")
        rate = float(spectrum.eigenvalues[1])
        weights = self._weights(spectrum, valley.target, 0)
        probabilities = np.array([
            float(self._powers(spectrum.eigenvalues, int(math.floor(t / rate))) @ weights)
            for t in t_grid
        ])

        thresholds = self._thresholds(env, valley)
        separated = all(
            thresholds[i] >= thresholds[i + 1] + delta for i in range(2)
        )
        log_time = 0.5 * (thresholds[1] + thresholds[2]) * valley.h
        intermediate_steps = int(math.floor(math.exp(min(log_time, 700.0))))
        intermediate = float(
            self._powers(spectrum.eigenvalues[1:2], intermediate_steps)[0] * weights[1]
        )
        horizon = int(math.floor(float(t_grid.max()) / rate)) if t_grid.size else 1
        exit_check = ExitProbability(
            steps=max(horizon, 1),
            survival=float(np.clip(
                self._powers(spectrum.eigenvalues, max(horizon, 1) - 1)
                @ self._weights(spectrum, valley.box, 0),
                0.0, 1.0,
            )),
            principal=float(spectrum.eigenvalues[0]),
        )
        return RelaxationCurve(
            k=k,
            valley=valley,
            rate=rate,
            t_grid=t_grid,
            probabilities=probabilities,
            thresholds=thresholds,
            separated=separated,
            intermediate=intermediate,
            intermediate_time=float(intermediate_steps),
            exit=exit_check,
        )

    def _thresholds(self, env: Environment, valley: OriginValley) -> Tuple[float, float, float]:
        """Smallest rescaled heights at which (a, b) holds at most 1, 2 and 3 minima."""
        potential = potential_of(env)
        sites = np.arange(valley.a, valley.b + 1)
        path = Path(sites.astype(float), potential.value_at(sites))
        top = max(valley.depths) + 1.0

        def count(height: float) -> int:
            return self.extrema_service.extract_extrema(path, height).q

        found = []
        for i in (1, 2, 3):
            lo, hi = 0.0, top
            if count(1e-9) <= i:
                found.append(0.0)
                continue
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if count(mid) <= i:
                    hi = mid
                else:
                    lo = mid
            found.append(hi / valley.h)
        return (found[0], found[1], found[2])

    def _mc_in_target(
        self, env: Environment, target: Tuple[int, int], steps: int, trials: int, seed: int
    ) -> Tuple[float, float]:
        rng = np.random.default_rng(seed)
        position = np.zeros(trials, dtype=np.int64)
        for time in range(steps):
            omega = env.omega[position - env.x_lo]
            position += np.where(rng.random(trials) < omega, 1, -1)
            low, high = int(position.min()), int(position.max())
            if low < env.x_lo or high > env.x_hi:
                raise WindowExitError(time + 1, low if low < env.x_lo else high)
        hits = (position >= target[0]) & (position <= target[1])
        p = float(np.mean(hits))
        return p, math.sqrt(p * (1.0 - p) / trials)

    @staticmethod
    def _indicator(sites: np.ndarray, target: Tuple[int, int]) -> np.ndarray:
        return ((sites >= target[0]) & (sites <= target[1])).astype(float)

    def _weights(self, spectrum: Spectrum, target: Tuple[int, int], start: int) -> np.ndarray:
        """(psi_j, 1_target) psi_j(start) per eigenpair, in the symmetric basis."""
        sites = spectrum.sites
        origin = int(np.searchsorted(sites, start))
        if origin >= sites.size or sites[origin] != start:
            raise WindowError(f"Start {start} is not in the box [{sites[0]}, {sites[-1]}]")
        half = 0.5 * spectrum.log_mu
        phi = np.exp(half)[:, None] * spectrum.eigenvectors
        mask = self._indicator(sites, target).astype(bool)
        if not mask.any():
            return np.zeros(spectrum.size)
        scaled = np.exp(half[mask] - half[origin])[:, None] * phi[mask]
        return scaled.sum(axis=0) * phi[origin]

    @staticmethod
    def _powers(eigenvalues: np.ndarray, steps: int) -> np.ndarray:
        """(1 - lambda_j)^steps, exact in sign for any integer steps."""
        if steps == 0:
            return np.ones(eigenvalues.size)
        factor = 1.0 - eigenvalues
        log_abs = np.full(eigenvalues.size, -np.inf)
        below = eigenvalues < 1.0
        log_abs[below] = np.log1p(-eigenvalues[below])
        above = eigenvalues > 1.0
        log_abs[above] = np.log(eigenvalues[above] - 1.0)
        sign = np.where((factor < 0) & (steps % 2 == 1), -1.0, 1.0)
        return sign * np.exp(float(steps) * log_abs)

    @staticmethod
    def _standard_error(values: np.ndarray) -> float:
        if values.size < 2:
            return math.nan
        return float(np.std(values, ddof=1) / math.sqrt(values.size))
