"""Core service for Brownian sampling and the renewal statistics of Brownian h-extrema.

Follows the Service Layer pattern: sampling, h-slope statistics, the
spacing law, tail/degeneracy frequencies and the distributional comparison
with rescaled random-walk potentials. h-extrema are extracted through the
injected ExtremaService.

Paths are drawn on a regular grid. Detection of h-extrema on the bare grid
underestimates every maximum and overestimates every minimum by about
0.58 sigma sqrt(dt), which shifts the height and spacing laws by several
percent at the default step. Samples therefore also carry an envelope:
the exact Brownian-bridge maximum and minimum of every grid cell,
inserted in the order in which the bridge is most likely to visit them.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from sinaispectra.domain.brownian import (
    SMALL_SPACING,
    BrownianSample,
    FrequencyCheck,
    KmtReport,
    RefinementCheck,
    SlopeStatistics,
    SpacingLaw,
    TailReport,
    TwoSampleCheck,
    bessel_escape_bound,
    count_tail_bound,
    series_terms,
    spacing_cdf,
    standard_density,
    standard_survival,
)
from sinaispectra.domain.constants import (
    DT_DIVISOR,
    LAPLACE_POINTS,
    MIN_INTERIOR_SLOPES,
    MIN_SERIES_TERMS,
    STANDARD_ERROR_GATE,
)
from sinaispectra.domain.environment import DisorderLaw, potential_of, rescale, sample_environment
from sinaispectra.domain.exceptions import ConfigurationError, InsufficientSpanError
from sinaispectra.domain.path import Path
from sinaispectra.services.core.extrema_service import ExtremaService

logger = logging.getLogger(__name__)

# (abscissa, value, kind) of consecutive h-extrema, boundary-clause maxima removed
Chain = List[Tuple[float, float, str]]

# Significance level of the KS gates
KS_LEVEL = 0.01


def _frequency(hits: np.ndarray) -> Tuple[float, float]:
    """Frequency of a boolean sample and its binomial standard error."""
    p = float(np.mean(hits)) if hits.size else 0.0
    se = math.sqrt(p * (1.0 - p) / hits.size) if hits.size else 0.0
    return p, se


def _child_seeds(seed: int, count: int, stream: int = 0) -> List[int]:
    sequence = np.random.SeedSequence([seed, stream])
    return [int(s) for s in sequence.generate_state(count)]


class BrownianService:
    """Core service for Brownian paths and their h-slope statistics."""

    def __init__(self, extrema_service: Optional[ExtremaService] = None):
        """Initialize the Brownian service

        Args:
            extrema_service: Service used to extract h-extrema from sampled paths
        """
        self.extrema_service = extrema_service or ExtremaService()

    # Public API methods

    @staticmethod
    def default_dt(h: float, sigma: float) -> float:
        """Grid step (h/sigma)^2 / DT_DIVISOR."""
        return (h / sigma) ** 2 / DT_DIVISOR

    def sample_path(
        self,
        sigma: float,
        dt: float,
        span: Tuple[float, float],
        seed: int,
        envelope: bool = True,
    ) -> BrownianSample:
        """Two-sided Brownian motion with B(0) = 0 on the grid dt Z within `span`.

        The halves t > 0 and t < 0 come from independent child streams of
        `seed`; a third stream draws the bridge envelope.

        Raises:
            ValueError: If dt or sigma is not positive, or span is not a finite
                interval containing 0 and at least one grid step
        """
        n_left, n_right = self._grid_counts(dt, span)
        if sigma <= 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        right_rng, left_rng, bridge_rng = (
            np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(3)
        )
        times, values = self._draw(sigma, dt, n_left, n_right, right_rng, left_rng)
        hull = None
        if envelope:
            hull = self._bridge_envelope(times, values, sigma, dt, bridge_rng)
        return BrownianSample(
            sigma=sigma,
            dt=dt,
            span=(float(times[0]), float(times[-1])),
            path=Path(times, values),
            seed=seed,
            envelope=hull,
        )

    def sample_paths(
        self,
        sigma: float,
        dt: float,
        span: Tuple[float, float],
        count: int,
        seed: int,
        envelope: bool = True,
    ) -> List[BrownianSample]:
        """`count` independent samples whose seeds are derived from `seed`."""
        return [
            self.sample_path(sigma, dt, span, child, envelope=envelope)
            for child in _child_seeds(seed, count)
        ]

    def slope_statistics(self, samples: Sequence[BrownianSample], h: float) -> SlopeStatistics:
        """Heights, spacings and Laplace transform of the interior h-slopes.

        The two slopes touching each sample's boundary and the slope that
        contains t = 0 are left out; the rest are stationary.

        Raises:
            InsufficientSpanError: If fewer than MIN_INTERIOR_SLOPES slopes remain
        """
        if not samples:
            raise ValueError("slope_statistics needs at least one sample")
        sigma = samples[0].sigma
        heights: List[float] = []
        spacings: List[float] = []
        for sample in samples:
            chain = self._chain(sample.extrema_path, h)
            for (s0, v0, _), (s1, v1, _) in zip(chain[1:-2], chain[2:-1]):
                if s0 <= 0.0 < s1:
                    continue
                heights.append(abs(v1 - v0) - h)
                spacings.append(s1 - s0)

        if len(heights) < MIN_INTERIOR_SLOPES:
            total = sum(s.span[1] - s.span[0] for s in samples)
            raise InsufficientSpanError(len(heights), MIN_INTERIOR_SLOPES, span=total)

        height_array = np.array(heights)
        spacing_array = np.array(spacings)
        ks = stats.kstest(height_array, "expon", args=(0.0, h))
        spacing_ks = stats.kstest(
            spacing_array, lambda x: spacing_cdf(x, h=h, sigma=sigma)
        )

        laplace = []
        for point in LAPLACE_POINTS:
            lam = point * sigma ** 2 / h ** 2
            weights = np.exp(-lam * spacing_array)
            laplace.append({
                "lam": lam,
                "empirical": float(np.mean(weights)),
                "se": float(np.std(weights, ddof=1) / math.sqrt(weights.size)),
                "target": 1.0 / math.cosh(h * math.sqrt(2.0 * lam) / sigma),
            })

        result = SlopeStatistics(
            h=h,
            sigma=sigma,
            heights=height_array,
            spacings=spacing_array,
            ks_statistic=float(ks.statistic),
            ks_pvalue=float(ks.pvalue),
            spacing_ks_statistic=float(spacing_ks.statistic),
            spacing_ks_pvalue=float(spacing_ks.pvalue),
            laplace=tuple(laplace),
        )
        logger.debug(
            "%d interior slopes, spacing mean %.4f, height KS p=%.3g",
            result.count, result.spacing_mean, result.ks_pvalue,
        )
        return result

    def spacing_law(
        self,
        x_grid,
        h: float = 1.0,
        sigma: float = 1.0,
        kmax: int = MIN_SERIES_TERMS,
    ) -> SpacingLaw:
        """Spacing density, size-biased density of the slope at 0 and both CDFs.

        The first-renewal CDF is (1/E X) * integral_0^t P(X > s) ds, evaluated
        by quadrature of the survival series.

        Raises:
            ValueError: If kmax < MIN_SERIES_TERMS or x_grid has no positive point
        """
        if kmax < MIN_SERIES_TERMS:
            raise ValueError(f"kmax must be at least {MIN_SERIES_TERMS}, got {kmax}")
        x = np.atleast_1d(np.asarray(x_grid, dtype=float))
        positive = x[x > 0]
        if not positive.size:
            raise ValueError("x_grid needs at least one positive point")

        scale = sigma ** 2 / h ** 2
        x_min = float(positive.min()) * scale
        terms, raised = series_terms(x_min, kmax)
        if raised:
            logger.warning("Spacing series raised from %d to %d terms at x=%g", kmax, terms, x_min)

        density = scale * standard_density(x * scale, terms)
        size_biased = x * scale * density
        cdf = 1.0 - standard_survival(x * scale, terms)

        quad_terms, _ = series_terms(SMALL_SPACING, terms)

        def survival(s: float) -> float:
            return float(standard_survival(s * scale, quad_terms)[0])

        mean = 1.0 / scale
        renewal = np.array([
            integrate.quad(survival, 0.0, t, limit=200)[0] / mean if t > 0 else 0.0
            for t in x
        ])

        odd = 2 * terms + 1
        rate = math.pi ** 2 * max(x_min, SMALL_SPACING) / 8.0
        truncation_error = scale * math.pi / 2.0 * odd * math.exp(-odd * odd * rate)
        return SpacingLaw(
            x_grid=x,
            density=density,
            size_biased=size_biased,
            cdf=cdf,
            renewal_cdf=np.clip(renewal, 0.0, 1.0),
            terms=terms,
            raised=raised,
            truncation_error=truncation_error,
        )

    def tail_checks(
        self,
        samples: Sequence[BrownianSample],
        h: float,
        deltas: Sequence[float] = (0.05, 0.1, 0.2, 0.4),
        beta: float = 0.05,
        epsilons: Sequence[float] = (0.025, 0.05, 0.1, 0.2),
        n_max: int = 20,
        bessel_trials: int = 100_000,
        bessel_time: float = 1.0,
        seed: int = 0,
    ) -> TailReport:
        """Frequencies of the degeneracy events of h-extrema in [-1, 1].

        Per sample, with E the h-extrema in [-1, 1]:
            count tail   |E| >= n, against e (1 + h^2/(2 sigma^2))^(-n);
            slope event  two consecutive extrema in E differ by less than h + delta;
            gap event    two distinct (minimum, maximum) pairs in E have
                         |gamma(x) - gamma(y)| within delta of each other;
            flat event   around some S in E, the path returns within eps of
                         B(S) at distance more than beta, before the
                         neighbouring extrema.
        The escape check compares E min(1, eps/|Z_t|) for a 3-d Gaussian
        Z_t against sqrt(2) eps / sqrt(pi t).

        Samples must cover [-1, 1] with room for the neighbouring extrema.
        """
        if not samples:
            raise ValueError("tail_checks needs at least one sample")
        sigma = samples[0].sigma
        counts, slope_gaps, pair_gaps, returns = [], [], [], []
        for sample in samples:
            path = sample.extrema_path
            chain = self._chain(path, h)
            inside = [i for i, (t, _, _) in enumerate(chain) if -1.0 <= t <= 1.0]
            counts.append(len(inside))
            slope_gaps.append(self._slope_gap(chain, inside, h))
            pair_gaps.append(self._pair_gap(chain, inside))
            returns.append(self._closest_return(path, chain, inside, beta))

        count_array = np.array(counts)
        count_tail = []
        for n in range(1, n_max + 1):
            p, se = _frequency(count_array >= n)
            count_tail.append(FrequencyCheck(
                name="count_tail", parameter=float(n), frequency=p, se=se,
                bound=count_tail_bound(n, h, sigma),
            ))

        slope_events = self._event_checks("slope", np.array(slope_gaps), deltas)
        gap_events = self._event_checks("gap", np.array(pair_gaps), deltas)
        flat_events = self._event_checks("flat", np.array(returns), epsilons)

        rng = np.random.default_rng(seed)
        radii = math.sqrt(bessel_time) * np.linalg.norm(
            rng.standard_normal((bessel_trials, 3)), axis=1
        )
        bessel = []
        for eps in epsilons:
            escape = np.minimum(1.0, eps / radii)
            bessel.append(FrequencyCheck(
                name="bessel_escape",
                parameter=float(eps),
                frequency=float(np.mean(escape)),
                se=float(np.std(escape, ddof=1) / math.sqrt(bessel_trials)),
                bound=bessel_escape_bound(bessel_time, eps),
            ))

        fitted = {
            "slope": self._fitted(slope_events, lambda d: (1.0 - math.exp(-d / h)) * h ** -4),
            "gap": self._fitted(gap_events, lambda d: d * h ** -11),
            "flat": self._fitted(
                flat_events,
                lambda e: (1.0 + e ** 0.25 / beta ** 0.125) * math.sqrt(e) / beta ** 0.25,
            ),
        }
        return TailReport(
            h=h,
            sigma=sigma,
            paths=len(samples),
            count_tail=tuple(count_tail),
            at_least_four=_frequency(count_array >= 4)[0],
            slope_events=slope_events,
            gap_events=gap_events,
            flat_events=flat_events,
            bessel=tuple(bessel),
            fitted_constants=fitted,
        )

    def kmt_diagnostic(
        self,
        law: DisorderLaw,
        N: int,
        paths: int,
        h: float,
        delta: float,
        Q: Optional[int] = None,
        seed: int = 0,
    ) -> KmtReport:
        """Compare rescaled potentials V_N on [-1, 1] with Brownian paths in law.

        Functionals: max on [-1, 1] and depth of the deepest labeled minimum
        (two-sample KS), the number of h-minima (per-bucket frequencies within
        STANDARD_ERROR_GATE standard errors), and the frequency of an accepted
        good-path certificate with at most Q minima.

        Raises:
            ConfigurationError: If the law has zero variance
        """
        sigma2 = law.sigma2
        if sigma2 <= 0:
            raise ConfigurationError(f"Law {law.describe()} has zero variance")
        sigma = math.sqrt(sigma2)

        potential_values: Dict[str, List[float]] = {"max": [], "depth": [], "q": [], "ok": []}
        brownian_values: Dict[str, List[float]] = {"max": [], "depth": [], "q": [], "ok": []}
        env_seeds = _child_seeds(seed, paths, stream=1)
        path_seeds = _child_seeds(seed, paths, stream=2)
        for env_seed, path_seed in zip(env_seeds, path_seeds):
            env = sample_environment(law, (-N, N), env_seed)
            rescaled = rescale(potential_of(env), N).to_path()
            self._record(rescaled, h, delta, Q, potential_values)
            brownian = self.sample_path(sigma, 1.0 / N, (-1.0, 1.0), path_seed, envelope=False)
            self._record(brownian.path, h, delta, Q, brownian_values)

        checks = [self._ks_check("max", potential_values["max"], brownian_values["max"])]
        if len(potential_values["depth"]) > 1 and len(brownian_values["depth"]) > 1:
            checks.append(
                self._ks_check("depth_1", potential_values["depth"], brownian_values["depth"])
            )
        checks.extend(self._bucket_checks(potential_values["q"], brownian_values["q"]))

        report = KmtReport(
            N=N,
            paths=paths,
            checks=tuple(checks),
            acceptance_potential=float(np.mean(potential_values["ok"])),
            acceptance_brownian=float(np.mean(brownian_values["ok"])),
        )
        logger.debug(
            "N=%d: acceptance %.3f (potential) vs %.3f (Brownian)",
            N, report.acceptance_potential, report.acceptance_brownian,
        )
        return report

    def scaling_check(
        self,
        sigma: float,
        h: float,
        a: float,
        half_span: float,
        paths: int,
        seed: int = 0,
        dt: Optional[float] = None,
    ) -> TwoSampleCheck:
        """Mean h-extrema counts on [-L, L] of B and of t -> B(a^2 t)/a.

        Both are drawn on the same effective grid, so discretization affects
        them equally and the counts must agree in law.
        """
        if a <= 0:
            raise ValueError(f"a must be positive, got {a}")
        step = dt or self.default_dt(h, sigma)
        direct, scaled = [], []
        for first, second in zip(
            _child_seeds(seed, paths, stream=3), _child_seeds(seed, paths, stream=4)
        ):
            plain = self.sample_path(sigma, step, (-half_span, half_span), first, envelope=False)
            direct.append(len(self._chain(plain.path, h)))
            wide = self.sample_path(
                sigma, step * a * a, (-half_span * a * a, half_span * a * a), second,
                envelope=False,
            )
            squeezed = Path(wide.path.abscissae / (a * a), wide.path.ordinates / a)
            scaled.append(len(self._chain(squeezed, h)))

        first_counts, second_counts = np.array(direct, float), np.array(scaled, float)
        difference = float(np.mean(second_counts) - np.mean(first_counts))
        se = math.sqrt(
            (np.var(first_counts, ddof=1) + np.var(second_counts, ddof=1)) / paths
        ) if paths > 1 else 0.0
        return TwoSampleCheck(
            name="scaling",
            statistic=float(np.mean(first_counts)),
            difference=difference,
            se=se,
            passed=abs(difference) <= STANDARD_ERROR_GATE * se,
        )

    def dt_refinement_check(
        self,
        sigma: float,
        h: float,
        span: Tuple[float, float],
        paths: int,
        seed: int = 0,
        dt: Optional[float] = None,
    ) -> RefinementCheck:
        """Whether halving dt changes the number of detected h-extrema.

        Each path is drawn at dt/2 with its envelope; the dt envelope is the
        same path merged cell pairwise, keeping the overall maximum and
        minimum of every merged cell in their order of occurrence.
        """
        step = dt or self.default_dt(h, sigma)
        unchanged = 0
        for child in _child_seeds(seed, paths, stream=5):
            fine = self.sample_path(sigma, step / 2.0, span, child)
            coarse_count = len(self._chain(self._coarsen(fine.extrema_path), h))
            fine_count = len(self._chain(fine.extrema_path, h))
            unchanged += int(coarse_count == fine_count)
        return RefinementCheck(paths=paths, unchanged=unchanged)

    # Private helpers

    @staticmethod
    def _grid_counts(dt: float, span: Tuple[float, float]) -> Tuple[int, int]:
        lo, hi = span
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > 0 or hi < 0:
            raise ValueError(f"span must be a finite interval containing 0, got {span}")
        n_left = int(math.floor(-lo / dt + 1e-9))
        n_right = int(math.floor(hi / dt + 1e-9))
        if n_left + n_right < 1:
            raise ValueError(f"span {span} holds no grid step of size {dt}")
        return n_left, n_right

    @staticmethod
    def _draw(
        sigma: float,
        dt: float,
        n_left: int,
        n_right: int,
        right_rng: np.random.Generator,
        left_rng: np.random.Generator,
    ) -> Tuple[np.ndarray, np.ndarray]:
        step = sigma * math.sqrt(dt)
        right = np.concatenate(([0.0], np.cumsum(right_rng.normal(0.0, step, n_right))))
        left = np.cumsum(left_rng.normal(0.0, step, n_left))[::-1]
        times = np.arange(-n_left, n_right + 1) * dt
        return times, np.concatenate((left, right))

    @staticmethod
    def _bridge_envelope(
        times: np.ndarray,
        values: np.ndarray,
        sigma: float,
        dt: float,
        rng: np.random.Generator,
    ) -> Path:
        """Insert the bridge maximum and minimum of each cell at thirds of the cell.

        For a bridge from a to b over dt, P(max >= m) = exp(-2 (m - a)(m - b) / (sigma^2 dt)).
        A rising cell visits its minimum first, a falling cell its maximum.
        """
        a, b = values[:-1], values[1:]
        cells = a.size
        spread = (a - b) ** 2
        noise = -2.0 * sigma ** 2 * dt
        highs = 0.5 * (a + b + np.sqrt(spread + noise * np.log1p(-rng.random(cells))))
        lows = 0.5 * (a + b - np.sqrt(spread + noise * np.log1p(-rng.random(cells))))
        rising = b > a

        t = np.empty(3 * cells + 1)
        v = np.empty(3 * cells + 1)
        t[0::3], v[0::3] = times, values
        t[1::3], v[1::3] = times[:-1] + dt / 3.0, np.where(rising, lows, highs)
        t[2::3], v[2::3] = times[:-1] + 2.0 * dt / 3.0, np.where(rising, highs, lows)
        return Path(t, v)

    @staticmethod
    def _coarsen(envelope: Path) -> Path:
        """Envelope on cells twice as long, from an envelope with an even cell count."""
        t, v = envelope.abscissae, envelope.ordinates
        cells = (t.size - 1) // 6
        if cells < 1:
            return envelope
        used = 6 * cells
        inner_t = t[:used].reshape(cells, 6)[:, 1:]
        inner_v = v[:used].reshape(cells, 6)[:, 1:]
        high, low = inner_v.argmax(axis=1), inner_v.argmin(axis=1)
        first, second = np.minimum(high, low), np.maximum(high, low)
        rows = np.arange(cells)

        coarse_t = np.empty(3 * cells + 1)
        coarse_v = np.empty(3 * cells + 1)
        coarse_t[0::3], coarse_v[0::3] = t[0:used + 1:6], v[0:used + 1:6]
        coarse_t[1::3], coarse_v[1::3] = inner_t[rows, first], inner_v[rows, first]
        coarse_t[2::3], coarse_v[2::3] = inner_t[rows, second], inner_v[rows, second]
        return Path(coarse_t, coarse_v)

    def _chain(self, path: Path, h: float) -> Chain:
        extrema = self.extrema_service.extract_extrema(path, h)
        chain = extrema.alternating()
        if extrema.left_boundary_max:
            chain = chain[1:]
        if extrema.right_boundary_max:
            chain = chain[:-1]
        return chain

    @staticmethod
    def _slope_gap(chain: Chain, inside: List[int], h: float) -> float:
        gaps = [
            abs(chain[i + 1][1] - chain[i][1]) - h
            for i in inside if i + 1 in inside
        ]
        return min(gaps) if gaps else math.inf

    @staticmethod
    def _pair_gap(chain: Chain, inside: List[int]) -> float:
        lows = [chain[i][1] for i in inside if chain[i][2] == "min"]
        tops = [chain[i][1] for i in inside if chain[i][2] == "max"]
        differences = np.sort(np.abs(np.subtract.outer(lows, tops)).ravel())
        if differences.size < 2:
            return math.inf
        return float(np.min(np.diff(differences)))

    @staticmethod
    def _closest_return(path: Path, chain: Chain, inside: List[int], beta: float) -> float:
        t, v = path.abscissae, path.ordinates
        closest = math.inf
        for i in inside:
            if i == 0 or i + 1 >= len(chain):
                continue
            centre, level, _ = chain[i]
            lo = int(np.searchsorted(t, chain[i - 1][0], side="left"))
            hi = int(np.searchsorted(t, chain[i + 1][0], side="right"))
            segment_t, segment_v = t[lo:hi], v[lo:hi]
            away = np.abs(segment_t - centre) > beta
            if np.any(away):
                closest = min(closest, float(np.min(np.abs(segment_v[away] - level))))
        return closest

    @staticmethod
    def _event_checks(
        name: str, statistic: np.ndarray, parameters: Sequence[float]
    ) -> Tuple[FrequencyCheck, ...]:
        checks = []
        for parameter in parameters:
            p, se = _frequency(statistic < parameter)
            checks.append(FrequencyCheck(name=name, parameter=float(parameter), frequency=p, se=se))
        return tuple(checks)

    @staticmethod
    def _fitted(
        checks: Tuple[FrequencyCheck, ...], shape: Callable[[float], float]
    ) -> float:
        ratios = [c.frequency / shape(c.parameter) for c in checks if shape(c.parameter) > 0]
        return max(ratios) if ratios else 0.0

    def _record(
        self,
        path: Path,
        h: float,
        delta: float,
        Q: Optional[int],
        into: Dict[str, List[float]],
    ) -> None:
        into["max"].append(float(np.max(path.ordinates)))
        certificate = self.extrema_service.good_path_certificate(path, h, delta)
        into["q"].append(float(certificate.q))
        if certificate.depths:
            into["depth"].append(float(certificate.depths[0]))
        within = Q is None or certificate.q <= Q
        into["ok"].append(float(certificate.accepted and within))

    @staticmethod
    def _ks_check(name: str, first: Sequence[float], second: Sequence[float]) -> TwoSampleCheck:
        result = stats.ks_2samp(first, second)
        return TwoSampleCheck(
            name=name,
            statistic=float(result.statistic),
            pvalue=float(result.pvalue),
            passed=float(result.pvalue) > KS_LEVEL,
        )

    @staticmethod
    def _bucket_checks(first: Sequence[float], second: Sequence[float]) -> List[TwoSampleCheck]:
        a, b = np.array(first), np.array(second)
        checks = []
        for bucket in sorted(set(a.tolist()) | set(b.tolist())):
            p1, se1 = _frequency(a == bucket)
            p2, se2 = _frequency(b == bucket)
            se = math.sqrt(se1 ** 2 + se2 ** 2)
            difference = p1 - p2
            checks.append(TwoSampleCheck(
                name=f"q={int(bucket)}",
                statistic=p1,
                difference=difference,
                se=se,
                passed=abs(difference) <= STANDARD_ERROR_GATE * se or difference == 0.0,
            ))
        return checks
