"""Service Layer class for h-extrema, saddles, good-path labeling and RG decimation.

All operations work on piecewise-linear paths. Extrema of such a path sit at
its vertices, so every definition is checked on vertex values only.
"""

import logging
from typing import Iterable, List, Optional, Sequence, Tuple

from sinaispectra.domain.constants import TIE_TOLERANCE
from sinaispectra.domain.exceptions import DegenerateError, OverlapError, WindowError
from sinaispectra.domain.extrema import (
    ExtremaSet,
    GoodPathCertificate,
    RgEquivalenceReport,
    RgStage,
    RgTranscript,
)
from sinaispectra.domain.path import Path

logger = logging.getLogger(__name__)

_START, _SEEK_MAX, _SEEK_MIN = 0, 1, 2


class ExtremaService:
    """Service Layer class for h-extrema operations.

    Holds only the tie tolerance; every method is a pure function of its
    arguments.
    """

    def __init__(self, tie_tolerance: float = TIE_TOLERANCE):
        """Initialize the extrema service

        Args:
            tie_tolerance: Relative tolerance under which two path values are tied
        """
        self.tie_tolerance = tie_tolerance

    # Public API methods

    def extract_extrema(self, path: Path, h: float) -> ExtremaSet:
        """Representatives of the h-minima and h-maxima of `path`.

        Single left-to-right sweep. Until the first variation of size h is
        seen the sweep tracks the running minimum and maximum; afterwards it
        alternates between seeking a maximum and seeking a minimum, confirming
        a candidate once the path moves h away from it. Strict updates keep
        the leftmost point of each equivalence class.

        Args:
            path: Piecewise-linear path
            h: Positive extremum height

        Returns:
            ExtremaSet with alternating minima and maxima
        """
        if h <= 0:
            raise ValueError(f"h must be positive, got {h}")
        t, v = path.abscissae, path.ordinates
        minima: List[int] = []
        maxima: List[int] = []
        left_boundary = False
        state = _START
        low = high = candidate = 0

        for i in range(1, len(path)):
            value = v[i]
            if state == _START:
                if value - v[low] >= h:
                    state, candidate = _SEEK_MAX, i
                elif v[high] - value >= h:
                    maxima.append(high)
                    left_boundary = True
                    state, candidate = _SEEK_MIN, i
                else:
                    if value < v[low]:
                        low = i
                    if value > v[high]:
                        high = i
            elif state == _SEEK_MAX:
                if value > v[candidate]:
                    candidate = i
                elif v[candidate] - value >= h:
                    maxima.append(candidate)
                    state, candidate = _SEEK_MIN, i
            else:
                if value < v[candidate]:
                    candidate = i
                elif value - v[candidate] >= h:
                    minima.append(candidate)
                    state, candidate = _SEEK_MAX, i

        right_boundary = state == _SEEK_MAX
        if right_boundary:
            maxima.append(candidate)

        result = ExtremaSet(
            h=h,
            minima=tuple(float(t[i]) for i in minima),
            maxima=tuple(float(t[i]) for i in maxima),
            min_values=tuple(float(v[i]) for i in minima),
            max_values=tuple(float(v[i]) for i in maxima),
            left_boundary_max=left_boundary,
            right_boundary_max=right_boundary,
        )
        logger.debug("h=%g: %d minima, %d maxima", h, result.q, len(result.maxima))
        return result

    def saddle_point(
        self, path: Path, A: Iterable[float], B: Iterable[float]
    ) -> Tuple[float, float]:
        """Lowest barrier between the site sets A and B.

        Returns:
            (z*, value): value = min over (a, b) of max of the path on [a^b, a v b],
            z* the smallest point attaining it inside an optimal bracket

        Raises:
            OverlapError: If A and B intersect
        """
        set_a, set_b = self._site_set(path, A), self._site_set(path, B)
        if not set_a or not set_b:
            raise ValueError("Saddle sets must be nonempty")
        if set_a & set_b:
            raise OverlapError(f"Sets overlap at {sorted(set_a & set_b)}")
        tolerance = self._tolerance(path)
        brackets = []
        for a in set_a:
            for b in set_b:
                z, top = path.argmax_between(a, b, tolerance)
                brackets.append((top, z))
        value = min(top for top, _ in brackets)
        z_star = min(z for top, z in brackets if top <= value + tolerance)
        return z_star, value

    def depth(self, path: Path, x: float, S: Iterable[float]) -> float:
        """gamma(z*({x}, S)) - gamma(x)."""
        others = self._site_set(path, S)
        if x in others:
            raise OverlapError(f"{x} belongs to the target set")
        _, value = self.saddle_point(path, [x], others)
        return value - float(path.value_at(x))

    def good_path_certificate(self, path: Path, h: float, delta: float) -> GoodPathCertificate:
        """Greedy labeling of the h-minima and the good-path verdict.

        x_1 is the minimum with the largest depth towards the path endpoints,
        x_2 the deepest towards the endpoints and x_1, and so on. The path is
        accepted when every minimum clears h + delta towards all other minima
        and the endpoints, and consecutive depths are delta-separated.

        Args:
            path: Piecewise-linear path
            h: Extremum height
            delta: Separation margin

        Returns:
            GoodPathCertificate (rejections carry a reason, never raise)
        """
        if h <= 0 or delta <= 0:
            raise ValueError("h and delta must be positive")
        extrema = self.extract_extrema(path, h)
        if not extrema.minima:
            return GoodPathCertificate(
                h=h, delta=delta, labeling=(), depths=(), saddles=(), saddle_values=(),
                verdict="rejected", reason="no_minima",
            )

        labeling, depths, saddles, saddle_values, degenerate = self._greedy_labeling(
            path, extrema.minima
        )
        tolerance = self._tolerance(path)

        ends = [path.start, path.end]
        shallow_slack = []
        for x in extrema.minima:
            others = [m for m in extrema.minima if m != x] + ends
            shallow_slack.append(self.depth(path, x, others) - (h + delta))
        separation_slack = [
            depths[k] - depths[k + 1] - delta for k in range(len(depths) - 1)
        ]
        margin = min(shallow_slack + separation_slack)

        reason = None
        if degenerate:
            reason = "degenerate"
        elif min(shallow_slack) < -tolerance:
            reason = "shallow_minimum"
        elif separation_slack and min(separation_slack) < -tolerance:
            reason = "depth_separation"

        return GoodPathCertificate(
            h=h,
            delta=delta,
            labeling=tuple(labeling),
            depths=tuple(depths),
            saddles=tuple(saddles),
            saddle_values=tuple(saddle_values),
            verdict="accepted" if reason is None else "rejected",
            reason=reason,
            margin=margin,
        )

    def rg_decimation(self, path: Path, h: float) -> RgTranscript:
        """Repeatedly decimate the bond with the smallest variation.

        Works on the alternating sequence of h-extrema; the path endpoints act
        as sinks at minus infinity and are never part of a bond.

        Raises:
            WindowError: If the path has no h-minimum
            DegenerateError: If the two smallest variations tie
        """
        extrema = self.extract_extrema(path, h)
        if not extrema.minima:
            raise WindowError(f"Path has no {h}-minimum to decimate")
        chain = [(t, value, kind) for t, value, kind in extrema.alternating()]
        tolerance = self._tolerance(path)
        stages = []
        while any(kind == "min" for _, _, kind in chain):
            variations = [abs(chain[i + 1][1] - chain[i][1]) for i in range(len(chain) - 1)]
            order = sorted(range(len(variations)), key=variations.__getitem__)
            if len(order) > 1 and variations[order[1]] - variations[order[0]] <= tolerance:
                raise DegenerateError(
                    f"Tied variations {variations[order[0]]:.12g} at stage {len(stages) + 1}"
                )
            i = order[0]
            left, right = chain[i], chain[i + 1]
            y = left[0] if left[2] == "min" else right[0]
            del chain[i : i + 2]
            stages.append(
                RgStage(
                    bond=(left[0], right[0]),
                    y=y,
                    T=variations[i],
                    surviving=tuple(t for t, _, _ in chain),
                )
            )
        return RgTranscript(h=h, stages=tuple(stages))

    def verify_rg_equivalence(self, path: Path, h: float) -> RgEquivalenceReport:
        """Check x_k = y_{q-k+1} and d_k = T_{q-k+1} for every k.

        Raises:
            DegenerateError: If the greedy labeling or the decimation is ambiguous
        """
        extrema = self.extract_extrema(path, h)
        if not extrema.minima:
            raise WindowError(f"Path has no {h}-minimum")
        labeling, depths, _, _, degenerate = self._greedy_labeling(path, extrema.minima)
        if degenerate:
            raise DegenerateError("Greedy labeling has tied depths")
        transcript = self.rg_decimation(path, h)

        q = len(labeling)
        mismatches = []
        for k in range(q):
            stage = transcript.stages[q - k - 1]
            if labeling[k] != stage.y:
                mismatches.append(f"x_{k + 1}={labeling[k]} but y_{q - k}={stage.y}")
            if abs(depths[k] - stage.T) > 1e-12 * (1.0 + abs(depths[k])):
                mismatches.append(f"d_{k + 1}={depths[k]!r} but T_{q - k}={stage.T!r}")
        return RgEquivalenceReport(q=q, equivalent=not mismatches, mismatches=tuple(mismatches))

    def nested_in(self, path: Path, coarse: float, fine: float) -> bool:
        """Every coarse-h minimum is fine-h equivalent to some fine-h minimum."""
        coarse_minima = self.extract_extrema(path, coarse).minima
        fine_minima = self.extract_extrema(path, fine).minima
        for x in coarse_minima:
            value = float(path.value_at(x))
            if not any(self._equivalent(path, x, y, value, fine) for y in fine_minima):
                return False
        return True

    # Private helpers

    def _greedy_labeling(
        self, path: Path, minima: Sequence[float]
    ) -> Tuple[List[float], List[float], List[float], List[float], bool]:
        tolerance = self._tolerance(path)
        remaining = list(minima)
        targets = [path.start, path.end]
        labeling, depths, saddles, saddle_values = [], [], [], []
        degenerate = False
        while remaining:
            scored = []
            for x in remaining:
                z, value = self.saddle_point(path, [x], [s for s in targets if s != x])
                scored.append((value - float(path.value_at(x)), x, z, value))
            scored.sort(key=lambda item: -item[0])
            if len(scored) > 1 and scored[0][0] - scored[1][0] <= tolerance:
                degenerate = True
            best_depth, best, z, value = scored[0]
            labeling.append(best)
            depths.append(best_depth)
            saddles.append(z)
            saddle_values.append(value)
            remaining.remove(best)
            targets.append(best)
        return labeling, depths, saddles, saddle_values, degenerate

    def _equivalent(self, path: Path, x: float, y: float, value: float, h: float) -> bool:
        lo, hi = min(x, y), max(x, y)
        spread = max(path.max_between(lo, hi) - value, value - path.min_between(lo, hi))
        return spread < h

    def _tolerance(self, path: Path) -> float:
        return self.tie_tolerance * (1.0 + path.scale)

    @staticmethod
    def _site_set(path: Path, sites: Iterable[float]) -> set:
        result = {float(s) for s in sites}
        outside = [s for s in result if not path.contains(s)]
        if outside:
            raise WindowError(f"Sites {sorted(outside)} lie outside [{path.start}, {path.end}]")
        return result
