"""Service Layer class for running verification suites.

Follows the Service Layer pattern: the suite service orchestrates the core
services (extrema, potential theory, spectral, brownian, walk) for one
ExperimentConfig and turns their reports into per-check verdicts. Each
suite declares its checks up front and decides every one of them, so a
suite report never drops a check silently.

Per-instance work runs in module-level functions that return flat rows;
with jobs > 1 they are spread over a process pool. Results are collected in
submission order, so reports do not depend on the worker count.
"""

import logging
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, linalg

from sinaispectra.domain.bounds import KappaConstants
from sinaispectra.domain.config import ExperimentConfig
from sinaispectra.domain.constants import (
    ANNEALED_KS_GATE,
    DETAILED_BALANCE_TOLERANCE,
    GREEN_SYMMETRY_TOLERANCE,
    IDENTITY_TOLERANCE,
    INSTANCE_PASS_FRACTION,
    KS_GATE,
    LOCALIZATION_LOWER_GATE,
    MC_STEP_BUDGET,
    MIN_INTERIOR_SLOPES,
    MIN_SCREENED_SEQUENCES,
    MIN_SPAN_FACTOR,
    RELATIVE_ERROR_GATE,
    RELAXATION_DEVIATION_GATE,
    RELAXATION_T_GRID,
    ROOT_MATCH_TOLERANCE,
    SPACING_MEAN_GATE,
    STANDARD_ERROR_GATE,
)
from sinaispectra.domain.environment import (
    Environment,
    dirichlet_form,
    generator_inner_product,
    potential_of,
    reversible_measure,
    sample_environment,
)
from sinaispectra.domain.exceptions import (
    ConfigurationError,
    DegenerateError,
    RejectedPathError,
    WindowError,
)
from sinaispectra.domain.generator import DirichletGenerator
from sinaispectra.domain.models import CheckVerdict, Diagnostic, SuiteReport
from sinaispectra.domain.path import Path
from sinaispectra.domain.walk import annealed_density
from sinaispectra.services.core.brownian_service import BrownianService
from sinaispectra.services.core.extrema_service import ExtremaService
from sinaispectra.services.core.potential_theory_service import PotentialTheoryService
from sinaispectra.services.core.spectral_service import SpectralService
from sinaispectra.services.core.walk_service import WalkService

logger = logging.getLogger(__name__)

Row = Dict[str, Any]

# Potential-identity instances also compared against Monte Carlo
MC_IDENTITY_INSTANCES = 20

# Half-width of the window used for potential-identity instances
IDENTITY_WINDOW = 40

# Points per random zigzag in the RG equivalence suite
ZIGZAG_LENGTH = 41

SPECTRAL_SUITES = ("thm1", "structural", "kmt")
BROWNIAN_SUITES = ("np-stats", "tails")


class SuiteService:
    """Service Layer class for suite orchestration.

    Holds the configuration and the core services; one public method per
    suite plus `run`, which dispatches on the configured suite name.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        extrema_service: Optional[ExtremaService] = None,
        spectral_service: Optional[SpectralService] = None,
        brownian_service: Optional[BrownianService] = None,
        walk_service: Optional[WalkService] = None,
    ):
        """Initialize the suite service

        Args:
            config: Validated experiment configuration
            extrema_service: Service for h-extrema operations
            spectral_service: Service for Dirichlet spectra
            brownian_service: Service for Brownian sampling and statistics
            walk_service: Service for walk simulation and valley propagators
        """
        self.config = config
        self.extrema_service = extrema_service or ExtremaService()
        self.spectral_service = spectral_service or SpectralService(self.extrema_service)
        self.brownian_service = brownian_service or BrownianService(self.extrema_service)
        self.walk_service = walk_service or WalkService(
            self.spectral_service,
            self.extrema_service,
            window_constant=config.window_constant,
        )
        self._suites: Dict[str, Callable[[SuiteReport], None]] = {
            "thm1": self.eigenvalue_counting,
            "np-stats": self.slope_statistics,
            "localize": self.localization,
            "relax": self.relaxation,
            "potential-identities": self.potential_identities,
            "structural": self.structural,
            "rg-equiv": self.rg_equivalence,
            "annealed": self.annealed,
            "tails": self.tails,
            "kmt": self.kmt,
        }

    # Public API methods

    def run(self) -> SuiteReport:
        """Run the configured suite and return its completed report.

        Raises:
            ConfigurationError: If the suite name is unknown
        """
        suite = self._suites.get(self.config.suite)
        if suite is None:
            raise ConfigurationError(f"Unknown suite '{self.config.suite}'")
        report = SuiteReport(suite=self.config.suite, config=self.config)
        started = time.perf_counter()
        suite(report)
        report.wall_clock_seconds = time.perf_counter() - started
        for name in report.missing:
            report.add(CheckVerdict.skip(name, "suite ended before deciding this check"))
        logger.debug("Suite %s: %s", report.suite, report.counts())
        return report

    def eigenvalue_counting(self, report: SuiteReport) -> None:
        """Exact small eigenvalues of L(I_N) against capacity predictions."""
        cfg = self.config
        report.declare(
            "counting", "capacity_formula", "eigenvector_localization",
            "order_brackets", "splitting", "root_location", "error_decreases_with_N",
        )
        tasks = [(cfg, N, seed) for N in cfg.N for seed in cfg.seeds]
        rows = self._map(_eigenvalue_instance, tasks)
        report.instances.extend(rows)

        usable = [r for r in rows if r["status"] == "ok" and r["q"] > 0]
        report.details["accepted"] = sum(r["status"] != "rejected" for r in rows)
        report.details["usable"] = len(usable)
        if not usable:
            reason = "no accepted, resolvable instance"
            for name in list(report.missing):
                report.add(CheckVerdict.skip(name, reason))
            return

        report.add(self._fraction("counting", usable, lambda r: r["counting_ok"], 1.0))
        worst_rel = max(r["max_rel_err"] for r in usable)
        report.add(CheckVerdict.decide(
            "capacity_formula", worst_rel <= RELATIVE_ERROR_GATE,
            f"largest relative error {worst_rel:.3g}", worst_rel,
        ))
        worst_vec = max(r["max_vec_dist"] for r in usable)
        report.add(CheckVerdict.decide(
            "eigenvector_localization", worst_vec <= RELATIVE_ERROR_GATE,
            f"largest eigenvector distance {worst_vec:.3g}", worst_vec,
        ))
        report.add(self._fraction(
            "order_brackets", usable, lambda r: r["brackets_ok"] and r["nested_brackets_ok"], 1.0
        ))
        report.add(self._fraction("splitting", usable, lambda r: r["splitting_ok"], 1.0))

        located = [r for r in usable if r.get("root_max_rel_err") is not None]
        if located:
            worst_root = max(r["root_max_rel_err"] for r in located)
            report.add(CheckVerdict.decide(
                "root_location", worst_root <= ROOT_MATCH_TOLERANCE,
                f"largest root mismatch {worst_root:.3g}", worst_root,
            ))
        else:
            reasons = sorted({r.get("root_reason") or "not located" for r in usable})
            report.add(CheckVerdict.skip("root_location", ", ".join(reasons)))

        medians = {
            N: statistics.median(r["max_rel_err"] for r in usable if r["N"] == N)
            for N in sorted({r["N"] for r in usable})
        }
        report.details["median_rel_err"] = medians
        if len(medians) < 2:
            report.add(CheckVerdict.skip("error_decreases_with_N", "needs at least two N values"))
        else:
            values = [medians[N] for N in sorted(medians)]
            report.add(CheckVerdict.decide(
                "error_decreases_with_N",
                all(b <= a for a, b in zip(values, values[1:])),
                f"medians {values}",
            ))

    def slope_statistics(self, report: SuiteReport) -> None:
        """Stationary h-slope statistics of Brownian paths."""
        cfg = self.config
        report.declare(
            "heights_exponential", "spacing_mean", "laplace_transform", "spacing_law",
            "spacing_law_normalized", "scaling", "dt_refinement",
        )
        seed = cfg.seeds[0]
        dt = self.brownian_service.default_dt(cfg.h, cfg.sigma)
        samples = self.brownian_service.sample_paths(
            cfg.sigma, dt, (-cfg.span, cfg.span), cfg.paths, seed
        )
        stats = self.brownian_service.slope_statistics(samples, cfg.h)
        report.details["slopes"] = stats.to_dict()

        report.add(CheckVerdict.decide(
            "heights_exponential", stats.ks_pvalue > KS_GATE,
            f"KS p-value {stats.ks_pvalue:.3g}", stats.ks_pvalue,
        ))
        report.add(CheckVerdict.decide(
            "spacing_mean", stats.spacing_mean_error <= SPACING_MEAN_GATE,
            f"relative error {stats.spacing_mean_error:.3g}", stats.spacing_mean_error,
        ))
        report.add(CheckVerdict.decide(
            "laplace_transform", stats.laplace_ok(STANDARD_ERROR_GATE),
            "empirical transform off by more than 3 SE",
        ))
        report.add(CheckVerdict.decide(
            "spacing_law", stats.spacing_ks_pvalue > KS_GATE,
            f"KS p-value {stats.spacing_ks_pvalue:.3g}", stats.spacing_ks_pvalue,
        ))

        scale = cfg.h ** 2 / cfg.sigma ** 2
        law = self.brownian_service.spacing_law(
            np.linspace(0.0, 40.0 * scale, 2001), cfg.h, cfg.sigma
        )
        mass = float(law.cdf[-1])
        report.add(CheckVerdict.decide(
            "spacing_law_normalized", abs(mass - 1.0) <= 1e-6, f"total mass {mass!r}", mass,
        ))

        batch = max(2, min(cfg.paths, 100))
        half_span = min(cfg.span, 20.0 * scale)
        scaling = self.brownian_service.scaling_check(
            cfg.sigma, cfg.h, 2.0, half_span, batch, seed=seed
        )
        report.details["scaling"] = scaling.to_dict()
        report.add(CheckVerdict.decide(
            "scaling", scaling.passed,
            f"count difference {scaling.difference:.3g} with SE {scaling.se:.3g}",
            scaling.difference,
        ))
        refinement = self.brownian_service.dt_refinement_check(
            cfg.sigma, cfg.h, (-half_span, half_span), batch, seed=seed
        )
        report.details["dt_refinement"] = refinement.to_dict()
        report.add(CheckVerdict.decide(
            "dt_refinement", refinement.passed,
            f"{refinement.unchanged_fraction:.3f} of paths unchanged",
            refinement.unchanged_fraction,
        ))

    def localization(self, report: SuiteReport) -> None:
        """Exact in-valley probability at time n on seeded environments."""
        cfg = self.config
        report.declare(
            "screened_fraction", "spectral_lower_bound", "mc_consistency",
            "initial_condition", "valley_identities", "powering_agreement",
            "improves_with_n",
        )
        rows = self._map(_localization_instance, [(cfg, seed) for seed in cfg.seeds])
        flat = [row for group in rows for row in group]
        report.instances.extend(flat)

        valid = [r for r in flat if r["status"] == "ok"]
        if not valid:
            for name in list(report.missing):
                report.add(CheckVerdict.skip(name, "no origin valley could be resolved"))
            return
        screened = [r for r in valid if r["screened"]]
        fraction = len(screened) / len(valid)
        report.details["screened"] = len(screened)
        report.add(CheckVerdict.decide(
            "screened_fraction", fraction >= 0.5, f"{fraction:.2f} passed the screen", fraction,
        ))

        bounded = [r for r in screened if r["spectral_lower"] is not None]
        if bounded:
            report.add(self._fraction(
                "spectral_lower_bound", bounded,
                lambda r: r["spectral_lower"] >= LOCALIZATION_LOWER_GATE, INSTANCE_PASS_FRACTION,
            ))
            report.add(self._fraction(
                "valley_identities", bounded, lambda r: r["identities_hold"],
                INSTANCE_PASS_FRACTION,
            ))
        else:
            report.add(CheckVerdict.skip("spectral_lower_bound", "no screened spectral instance"))
            report.add(CheckVerdict.skip("valley_identities", "no screened spectral instance"))

        estimated = [r for r in valid if r["mc_estimate"] is not None]
        if estimated:
            report.add(self._fraction("mc_consistency", estimated, lambda r: r["consistent"], 1.0))
        else:
            report.add(CheckVerdict.skip("mc_consistency", "Monte Carlo budget too small for n"))

        residuals = [r["initial_residual"] for r in valid if r["initial_residual"] is not None]
        if residuals:
            worst = max(residuals)
            report.add(CheckVerdict.decide(
                "initial_condition", worst <= 1e-8, f"largest residual {worst:.3g}", worst,
            ))
        else:
            report.add(CheckVerdict.skip("initial_condition", "no spectral instance"))

        powering = [r["powering_gap"] for r in valid if r.get("powering_gap") is not None]
        if powering:
            worst = max(powering)
            report.add(CheckVerdict.decide(
                "powering_agreement", worst <= 1e-8, f"largest gap {worst:.3g}", worst,
            ))
        else:
            report.add(CheckVerdict.skip("powering_agreement", "no spectral instance"))

        if len(cfg.n) < 2:
            report.add(CheckVerdict.skip("improves_with_n", "needs at least two n values"))
        else:
            medians = []
            for n in sorted(cfg.n):
                values = [r["spectral_lower"] for r in bounded if r["n"] == n]
                medians.append(statistics.median(values) if values else math.nan)
            report.details["median_lower_bound"] = medians
            finite = [m for m in medians if not math.isnan(m)]
            report.add(CheckVerdict.decide(
                "improves_with_n",
                len(finite) == len(medians) and all(b >= a for a, b in zip(finite, finite[1:])),
                f"medians {medians}",
            ))

    def relaxation(self, report: SuiteReport) -> None:
        """Relaxation curves of successive valley boxes."""
        cfg = self.config
        report.declare(
            "screened_sequences", "relaxation_curve", "intermediate_term", "curves_in_range",
        )
        rows = self._map(_relaxation_instance, [(cfg, seed) for seed in cfg.seeds])
        report.instances.extend(rows)

        with_curves = [r for r in rows if r["curves"] > 0]
        screened = [r for r in with_curves if r["separated"]]
        report.details["screened_sequences"] = len(screened)
        report.add(CheckVerdict.decide(
            "screened_sequences", len(screened) >= MIN_SCREENED_SEQUENCES,
            f"{len(screened)} screened box sequences, need {MIN_SCREENED_SEQUENCES}",
            float(len(screened)),
        ))
        if not with_curves:
            for name in list(report.missing):
                report.add(CheckVerdict.skip(name, "no box sequence reached a second box"))
            return
        report.add(self._fraction("curves_in_range", with_curves, lambda r: r["in_range"], 1.0))
        if not screened:
            for name in ("relaxation_curve", "intermediate_term"):
                report.add(CheckVerdict.skip(name, "no screened box sequence"))
            return
        report.add(self._fraction(
            "relaxation_curve", screened,
            lambda r: r["sup_deviation"] <= RELAXATION_DEVIATION_GATE, 1.0,
        ))
        report.add(self._fraction(
            "intermediate_term", screened,
            lambda r: abs(r["intermediate"] + 1.0) <= RELAXATION_DEVIATION_GATE, 1.0,
        ))

    def potential_identities(self, report: SuiteReport) -> None:
        """Exact identities of the potential theory and their Monte Carlo counterparts."""
        cfg = self.config
        names = (
            "detailed_balance", "dirichlet_form", "complement", "green_reversible",
            "green_inverse", "renewal_bound", "closed_forms", "sandwiches", "barrier_inequality",
        )
        report.declare(*names, "monte_carlo")
        tasks = [
            (cfg, seed, index < MC_IDENTITY_INSTANCES) for index, seed in enumerate(cfg.seeds)
        ]
        rows = self._map(_identity_instance, tasks)
        report.instances.extend(rows)
        for name in names:
            report.add(self._fraction(name, rows, lambda r, key=name: r[key], 1.0))

        compared = sum(r.get("mc_comparisons", 0) for r in rows)
        exceptions = sum(r.get("mc_exceptions", 0) for r in rows)
        if compared == 0:
            report.add(CheckVerdict.skip("monte_carlo", "no Monte Carlo comparison was run"))
        else:
            allowed = math.ceil(0.01 * compared)
            report.add(CheckVerdict.decide(
                "monte_carlo", exceptions <= allowed,
                f"{exceptions} of {compared} comparisons off by more than 3 SE",
                float(exceptions),
            ))

    def structural(self, report: SuiteReport) -> None:
        """Oscillation, parity, nesting and interlacing of Dirichlet spectra."""
        cfg = self.config
        report.declare("oscillation", "parity", "monotonicity", "interlacing", "residuals")
        rows = self._map(
            _structural_instance, [(cfg, N, seed) for N in cfg.N for seed in cfg.seeds]
        )
        report.instances.extend(rows)
        report.add(self._fraction("oscillation", rows, lambda r: r["oscillation_ok"], 1.0))
        report.add(self._fraction("parity", rows, lambda r: r["parity_ok"], 1.0))
        report.add(self._fraction("monotonicity", rows, lambda r: r["monotone"], 1.0))
        report.add(self._fraction("interlacing", rows, lambda r: r["interlacing"], 1.0))
        worst = max(r["max_residual"] for r in rows)
        report.add(CheckVerdict.decide(
            "residuals", worst <= 1e-8, f"largest residual {worst:.3g}", worst,
        ))

    def rg_equivalence(self, report: SuiteReport) -> None:
        """Greedy labeling against RG decimation on random zigzags."""
        cfg = self.config
        report.declare("rg_equivalence")
        rows = self._map(_zigzag_instance, [(cfg, seed) for seed in cfg.seeds])
        report.instances.extend(rows)
        checked = sum(r["checked"] for r in rows)
        failures = sum(r["mismatched"] for r in rows)
        report.details["degenerate"] = sum(r["degenerate"] for r in rows)
        if checked == 0:
            report.add(CheckVerdict.skip("rg_equivalence", "every zigzag was degenerate"))
            return
        report.add(CheckVerdict.decide(
            "rg_equivalence", failures == 0,
            f"{failures} of {checked} zigzags disagree", float(checked - failures),
        ))

    def annealed(self, report: SuiteReport) -> None:
        """Law of the rescaled valley bottom over environments."""
        cfg = self.config
        report.declare("density_normalized", "annealed_law")
        half, _ = integrate.quad(lambda x: float(annealed_density(x)[0]), 0.0, np.inf, limit=200)
        mass = 2.0 * half
        report.add(CheckVerdict.decide(
            "density_normalized", abs(mass - 1.0) <= 1e-6, f"total mass {mass!r}", mass,
        ))
        result = self.walk_service.annealed_limit_check(
            cfg.disorder_law, max(cfg.n), len(cfg.seeds), seed=cfg.seeds[0],
            level=ANNEALED_KS_GATE,
        )
        report.details["annealed"] = result.to_dict()
        report.instances.extend({"sample": float(x)} for x in result.samples)
        if result.samples.size < 2:
            report.add(CheckVerdict.skip("annealed_law", "fewer than two resolvable valleys"))
            return
        report.add(CheckVerdict.decide(
            "annealed_law", result.passed, f"KS p-value {result.ks_pvalue:.3g}", result.ks_pvalue,
        ))

    def tails(self, report: SuiteReport) -> None:
        """One-sided tail bounds for Brownian h-extrema."""
        cfg = self.config
        report.declare("count_tail", "bessel_escape", "shape")
        dt = self.brownian_service.default_dt(cfg.h, cfg.sigma)
        samples = self.brownian_service.sample_paths(
            cfg.sigma, dt, (-cfg.span, cfg.span), cfg.paths, cfg.seeds[0]
        )
        tail = self.brownian_service.tail_checks(samples, cfg.h, seed=cfg.seeds[0])
        report.details["tails"] = tail.to_dict()
        report.add(CheckVerdict.decide(
            "count_tail", all(c.holds for c in tail.count_tail),
            "count frequency above its bound",
        ))
        report.add(CheckVerdict.decide(
            "bessel_escape", all(c.holds for c in tail.bessel),
            "escape frequency above its bound",
        ))
        report.add(CheckVerdict.decide("shape", tail.shape_ok, "frequencies not monotone"))

    def kmt(self, report: SuiteReport) -> None:
        """Distributional comparison of rescaled potentials with Brownian motion."""
        cfg = self.config
        names = [f"kmt_N{N}" for N in cfg.N]
        report.declare(*names)
        for N, name in zip(cfg.N, names):
            result = self.brownian_service.kmt_diagnostic(
                cfg.disorder_law, N, cfg.paths, cfg.h, cfg.delta, seed=cfg.seeds[0]
            )
            report.instances.append({"N": N, **{c.name: c.statistic for c in result.checks}})
            report.details[name] = result.to_dict()
            failed = [c.name for c in result.checks if not c.passed]
            report.add(CheckVerdict.decide(
                name, result.passed, f"failed: {', '.join(failed)}",
                result.acceptance_potential,
            ))

    def diagnostics(self) -> List[Diagnostic]:
        """Dry-run screens for the configured suite; never raises on findings.

        The solver-floor screen predicts the smallest eigenvalue from the
        upper bracket at the typical valley depth, the expected range of a
        Brownian path with the law's variance over [-1, 1]. The span and
        slope-count screens apply to the Brownian suites.
        """
        cfg = self.config
        findings: List[Diagnostic] = []
        suite = cfg.suite

        if suite in SPECTRAL_SUITES:
            law = cfg.disorder_law
            constants = KappaConstants.for_kappa(law.kappa)
            depth = math.sqrt(16.0 / math.pi * law.sigma2)
            for N in cfg.N:
                predicted = constants.upper(N, depth)
                if predicted < self.spectral_service.solver_floor:
                    findings.append(Diagnostic(
                        "solver_floor", "warning",
                        f"N={N}: predicted eigenvalue {predicted:.2e} is unresolvable "
                        f"(floor {self.spectral_service.solver_floor:.0e})",
                    ))

        if suite in BROWNIAN_SUITES:
            scale = cfg.h ** 2 / cfg.sigma ** 2
            if 2.0 * cfg.span < MIN_SPAN_FACTOR * scale:
                findings.append(Diagnostic(
                    "span", "warning",
                    f"span [-{cfg.span:g}, {cfg.span:g}] is shorter than "
                    f"{MIN_SPAN_FACTOR} h^2/sigma^2 = {MIN_SPAN_FACTOR * scale:g}",
                ))
            expected = cfg.paths * 2.0 * cfg.span / scale
            if expected < MIN_INTERIOR_SLOPES:
                findings.append(Diagnostic(
                    "slope_count", "warning",
                    f"about {expected:.0f} slopes expected, at least "
                    f"{MIN_INTERIOR_SLOPES} needed",
                ))

        if suite == "localize" and max(cfg.n) * cfg.trials > MC_STEP_BUDGET:
            findings.append(Diagnostic(
                "mc_budget", "warning",
                f"trials cut to {int(MC_STEP_BUDGET // max(cfg.n))} at n={max(cfg.n):g}",
            ))

        if not findings:
            findings.append(Diagnostic("config", "ok", "ok"))
        return findings

    # Private helpers

    def _map(self, fn: Callable[..., Any], tasks: Sequence[Tuple]) -> List[Any]:
        if self.config.jobs <= 1 or len(tasks) <= 1:
            return [fn(*task) for task in tasks]
        with ProcessPoolExecutor(max_workers=self.config.jobs) as pool:
            return list(pool.map(fn, *zip(*tasks)))

    @staticmethod
    def _fraction(
        name: str, rows: Iterable[Row], predicate: Callable[[Row], bool], required: float
    ) -> CheckVerdict:
        rows = list(rows)
        hits = sum(1 for r in rows if predicate(r))
        fraction = hits / len(rows) if rows else 1.0
        return CheckVerdict.decide(
            name, fraction >= required,
            f"{hits} of {len(rows)} instances passed (required {required:.0%})", fraction,
        )


# Per-instance workers

def _eigenvalue_instance(config: ExperimentConfig, N: int, seed: int) -> Row:
    env = sample_environment(config.disorder_law, (-N + 1, N), seed)
    spectral = SpectralService()
    row: Row = {"N": N, "seed": seed}
    try:
        result = spectral.metastability_report(env, N, config.h, config.delta)
    except RejectedPathError as e:
        row.update(status="rejected", reason=e.reason, q=0)
        return row
    row.update(
        status=result.status,
        q=result.q,
        counting_ok=result.counting_ok,
        max_rel_err=result.max_rel_err(),
        max_vec_dist=result.max_vec_dist(),
        brackets_ok=result.brackets_ok,
        nested_brackets_ok=result.nested_brackets_ok,
        splitting_ok=result.splitting_ok,
        rate_gaps_ok=result.rate_gaps_ok,
        lambda_exact=list(result.lambda_exact),
        lambda_pred=list(result.lambda_pred),
        minima=list(result.minima_sites),
    )
    if result.resolvable and result.q > 0:
        roots = spectral.determinant_root_locate(env, N, config.h, config.delta, result.q)
        row["root_reason"] = roots.reason
        row["root_max_rel_err"] = max(roots.rel_errors) if roots.matched else None
    return row


def _walk_window(config: ExperimentConfig, log_n: float) -> int:
    scale = log_n ** 2
    factor = max(1.0 / config.screen_delta_prime, 10.0 / config.disorder_law.sigma2)
    return int(math.ceil(factor * scale)) + 1


def _localization_instance(config: ExperimentConfig, seed: int) -> List[Row]:
    walk = WalkService(window_constant=config.window_constant)
    reach = _walk_window(config, math.log(max(config.n)))
    env = sample_environment(config.disorder_law, (-reach, reach), seed)
    rows = []
    for n in sorted(config.n):
        row: Row = {"seed": seed, "n": n}
        trials = min(config.trials, int(MC_STEP_BUDGET // n))
        try:
            result = walk.localization_report(
                env, n, mc_trials=trials, seed=seed,
                delta=config.screen_delta, delta_prime=config.screen_delta_prime,
                beta=config.screen_beta,
            )
        except (WindowError, DegenerateError) as e:
            row.update(status="unresolved", reason=str(e), screened=False)
            rows.append(row)
            continue
        valley = result.valley
        row.update(
            status="ok",
            screened=result.screening.passed,
            failures=list(result.screening.failures),
            a=valley.a, m=valley.m, b=valley.b,
            box_size=valley.box_size,
            spectral_lower=result.spectral_lower,
            mc_estimate=result.mc_estimate,
            mc_se=result.mc_se,
            mc_trials=result.mc_trials,
            consistent=result.consistent,
            initial_residual=result.initial_residual,
            identities_hold=bool(result.identities and result.identities.holds()),
            flagged=result.flagged,
        )
        if result.spectral_lower is not None:
            steps = min(int(n), 200)
            row["powering_gap"] = walk.powering_check(env, valley.box, valley.target, steps)
        rows.append(row)
    return rows


def _relaxation_instance(config: ExperimentConfig, seed: int) -> Row:
    walk = WalkService(window_constant=config.window_constant)
    n0 = min(config.n)
    reach = _walk_window(config, 3.0 * math.log(n0))
    env = sample_environment(config.disorder_law, (-reach, reach), seed)
    row: Row = {"seed": seed, "n0": n0}
    try:
        result = walk.relaxation(env, n0, RELAXATION_T_GRID, delta=config.screen_delta)
    except (WindowError, DegenerateError) as e:
        row.update(curves=0, reason=str(e), separated=False)
        return row
    curves = result.curves
    row.update(
        curves=len(curves),
        flagged=result.flagged,
        rates=list(result.rates),
        separated=bool(curves) and all(c.separated for c in curves),
        in_range=all(c.in_range for c in curves),
        sup_deviation=max((c.sup_deviation for c in curves), default=math.nan),
        intermediate=curves[0].intermediate if curves else math.nan,
        monotone=all(c.monotone for c in curves),
    )
    return row


def _identity_instance(config: ExperimentConfig, seed: int, with_mc: bool) -> Row:
    rng = np.random.default_rng(seed)
    env = sample_environment(config.disorder_law, (-IDENTITY_WINDOW, IDENTITY_WINDOW), seed)
    theory = PotentialTheoryService(env)
    width = int(rng.integers(3, 13))
    a = int(rng.integers(-IDENTITY_WINDOW, IDENTITY_WINDOW - width + 1))
    b = a + width
    x = int(rng.integers(a + 1, b))
    row: Row = {"seed": seed, "a": a, "x": x, "b": b}

    # mu(x) omega_x = mu(x + 1)(1 - omega_{x+1})
    log_mu = reversible_measure(env).log_weights
    forward = log_mu[:-1] + np.log(env.omega[:-1])
    backward = log_mu[1:] + np.log1p(-env.omega[1:])
    row["detailed_balance"] = bool(
        np.allclose(forward, backward, rtol=0.0, atol=DETAILED_BALANCE_TOLERANCE)
    )

    f = np.zeros(len(env))
    f[1:-1] = rng.normal(size=len(env) - 2)
    form, inner = dirichlet_form(env, f), generator_inner_product(env, f)
    row["dirichlet_form"] = abs(form - inner) <= IDENTITY_TOLERANCE * max(1.0, abs(form))

    h_ab = theory.equilibrium_two_point(a, b)
    h_ba = theory.equilibrium_general([b], [a])
    row["complement"] = bool(
        np.max(np.abs(h_ab.values + h_ba.on(h_ab.sites) - 1.0)) <= IDENTITY_TOLERANCE
    )

    green = theory.green_function(range(a + 1, b))
    mu = reversible_measure(env).log_at(green.sites)
    scaled = np.log(np.abs(green.matrix)) + mu[:, None]
    row["green_reversible"] = bool(
        np.allclose(scaled, scaled.T, rtol=0.0, atol=GREEN_SYMMETRY_TOLERANCE)
    )
    gen = DirichletGenerator.build(env, (a + 1, b - 1))
    product = gen.dense() @ green.matrix
    row["green_inverse"] = bool(
        np.max(np.abs(product - np.eye(gen.size)))
        <= IDENTITY_TOLERANCE * max(1.0, float(np.max(green.matrix)))
    )
    row["renewal_bound"] = theory.renewal_bound_check(x, [a], [b])

    direct_h, direct_exit = _direct_solves(env, gen, a)
    moments = theory.hitting_moments(x, a, b)
    exit_error = abs(moments.mean_exit / direct_exit[x - a - 1] - 1.0)
    row["closed_forms"] = bool(
        np.max(np.abs(h_ab.on(gen.sites) - direct_h)) <= IDENTITY_TOLERANCE
        and exit_error <= IDENTITY_TOLERANCE
    )

    mean_check, conditional_check = theory.exit_time_sandwich(a, b)
    row["sandwiches"] = bool(
        theory.equilibrium_sandwich(x, a, b).holds and mean_check.holds
        and conditional_check.holds
    )
    row["barrier_inequality"] = _barrier_case(env, rng, a, b)

    if with_mc:
        walk = WalkService()
        estimate = walk.mc_hitting(env, x, [a], [b], config.trials, seed)
        pairs = [
            (estimate.probability, estimate.probability_se, float(h_ab.value_at(x))),
            (estimate.mean_exit, estimate.mean_exit_se, moments.mean_exit),
            (estimate.conditional_mean, estimate.conditional_mean_se, moments.conditional_mean),
            (estimate.conditional_mean_b, estimate.conditional_mean_b_se,
             moments.conditional_mean_b),
        ]
        usable = [(est, se, exact) for est, se, exact in pairs if math.isfinite(est) and se > 0]
        row["mc_comparisons"] = len(usable)
        row["mc_exceptions"] = sum(
            abs(est - exact) > STANDARD_ERROR_GATE * se for est, se, exact in usable
        )
    return row


def _direct_solves(
    env: Environment, gen: DirichletGenerator, a: int
) -> Tuple[np.ndarray, np.ndarray]:
    """h_{a,b} and E tau on the interior of (a, b) by banded solves of L_D."""
    ab = np.zeros((3, gen.size))
    ab[1] = 1.0
    if gen.size > 1:
        ab[0, 1:] = gen.upper
        ab[2, :-1] = gen.lower
    rhs = np.zeros(gen.size)
    rhs[0] = 1.0 - float(env.omega_at(a + 1))
    h = linalg.solve_banded((1, 1), ab, rhs)
    return h, linalg.solve_banded((1, 1), ab, np.ones(gen.size))


def _barrier_case(env: Environment, rng: np.random.Generator, a: int, b: int) -> bool:
    values = potential_of(env)

    def top(p: int, q: int) -> float:
        return float(np.max(values.value_at(np.arange(min(p, q), max(p, q) + 1))))

    x, y = (int(v) for v in rng.integers(a + 1, b, size=2))
    base = float(values.value_at(y))
    if y <= x:
        m1, m2, m3, before = top(a, y), top(y, x), top(x, b), True
    else:
        m1, m2, m3, before = top(y, b), top(x, y), top(a, x), False
    return PotentialTheoryService.barrier_inequality(m1 - base, m2 - base, m3 - base, before)


def _structural_instance(config: ExperimentConfig, N: int, seed: int) -> Row:
    spectral = SpectralService()
    env = sample_environment(config.disorder_law, (-N + 1, N), seed)
    gen = spectral.build_generator(env, (-N + 1, N - 1))
    spectrum = spectral.full_spectrum(gen)
    structure = spectral.structural_checks(spectrum, gen)
    rng = np.random.default_rng(seed)
    holes = rng.choice(np.arange(-N + 2, N - 1), size=min(3, 2 * N - 3), replace=False)
    nesting = spectral.nesting_check(env, (-N + 1, N - 1), holes.tolist())
    return {
        "N": N,
        "seed": seed,
        "oscillation_ok": structure.oscillation_ok,
        "parity_ok": structure.parity_ok(),
        "parity_residual": structure.parity_residual,
        "monotone": nesting.monotone,
        "interlacing": nesting.interlacing,
        "max_residual": float(np.max(spectrum.residuals)),
    }


def _zigzag_instance(config: ExperimentConfig, seed: int) -> Row:
    extrema = ExtremaService()
    rng = np.random.default_rng(seed)
    checked = mismatched = degenerate = 0
    for _ in range(config.paths):
        values = np.cumsum(rng.normal(size=ZIGZAG_LENGTH))
        path = Path(np.arange(ZIGZAG_LENGTH, dtype=float), values)
        try:
            result = extrema.verify_rg_equivalence(path, config.h)
        except (DegenerateError, WindowError):
            degenerate += 1
            continue
        checked += 1
        mismatched += int(not result.equivalent)
    return {"seed": seed, "checked": checked, "mismatched": mismatched, "degenerate": degenerate}
